"""Landmark-sketched fitting path with O(M^2 N) cost and no N x N matrices.

All three kernels are approximated through M uniformly sampled landmark
columns (K ~= C W^-1 C^T). The fitting eigenproblem then reduces to an
M x M problem through a reduction matrix Omega; eigenvectors of the full
problem are recovered as C_x V Theta. When every training point is a
landmark the reduction is exact and the dense path is recovered.

The Omega evaluation here is an algebraically identical regrouping of the
direct formula: each product of the form Wt (S Wt + a I)^-1 is collapsed
to (S + a Wj)^-1, where Wj is the jittered landmark block. This avoids
multiplying by the explicit inverse of nearly singular landmark blocks
(delta kernels with duplicate landmark labels produce exactly those) and
agrees with the direct evaluation to rounding on well-conditioned blocks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .datagen import DataSet
from .dcm import ProjectionModel, _canonical_signs
from .errors import ComplexSpectrum, InvalidInput, RankDeficient
from .kernels import DELTA, KernelSpec, cross_gram
from .linalg import IMAG_TOL, ridge_inverse, sym_eig

_JITTER_SCALE = 1e-10
_RANK_TOL = 1e-10


@dataclass
class NystromSketch:
    """Landmark sketch of the three kernels.

    C matrices are column-centered (H C); W blocks are the raw landmark
    kernels with Wt their jitter-regularized inverses; S blocks are cross
    products of the centered C matrices. approx_row_means carries the row
    means of the raw approximated input kernel, used to center test
    columns at projection time.
    """

    landmark_indices: np.ndarray
    Cx: np.ndarray
    Cy: np.ndarray
    Cd: np.ndarray
    Wx: np.ndarray
    Wy: np.ndarray
    Wd: np.ndarray
    Wt_x: np.ndarray
    Wt_y: np.ndarray
    Wt_d: np.ndarray
    jitter_x: float
    jitter_y: float
    jitter_d: float
    Sxx: np.ndarray
    Sxy: np.ndarray
    Sxd: np.ndarray
    Syy: np.ndarray
    Sdd: np.ndarray
    approx_row_means: np.ndarray

    @property
    def Syx(self):
        return self.Sxy.T

    @property
    def Sdx(self):
        return self.Sxd.T


def sample_landmarks(N: int, M: int, seed: int) -> np.ndarray:
    """M distinct indices drawn uniformly without replacement."""
    if not 1 <= M <= N:
        raise InvalidInput(f"M must be in [1, {N}], got {M}")
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    return rng.permutation(N)[:M]


def _jitter(W: np.ndarray) -> float:
    M = W.shape[0]
    return _JITTER_SCALE * float(np.trace(W)) / M


def build_sketch(data: DataSet, spec_x: KernelSpec, landmarks,
                 spec_y: KernelSpec | None = None,
                 spec_d: KernelSpec | None = None) -> NystromSketch:
    """Assemble landmark columns, regularized blocks, and cross products.

    Centering subtracts each C column's mean, which centers the
    approximated kernel exactly: H (C W^-1 C^T) H = (HC) W^-1 (HC)^T.
    """
    spec_y = spec_y or KernelSpec(DELTA)
    spec_d = spec_d or KernelSpec(DELTA)
    idx = np.asarray(landmarks, dtype=np.int64)
    if len(np.unique(idx)) != len(idx):
        raise InvalidInput("landmark indices must be distinct")
    N = len(data)
    M = len(idx)
    Cx = cross_gram(spec_x, data.X, data.X[idx])
    Cy = cross_gram(spec_y, data.y, data.y[idx])
    Cd = cross_gram(spec_d, data.d, data.d[idx])
    Wx, Wy, Wd = Cx[idx].copy(), Cy[idx].copy(), Cd[idx].copy()
    jx, jy, jd = _jitter(Wx), _jitter(Wy), _jitter(Wd)
    Wt_x = ridge_inverse(Wx, jx)
    Wt_y = ridge_inverse(Wy, jy)
    Wt_d = ridge_inverse(Wd, jd)
    # row means of the raw approximated input kernel, O(NM)
    ones_proj = Cx.T @ np.full(N, 1.0 / N)
    approx_row_means = Cx @ (Wt_x @ ones_proj)
    Cx = Cx - Cx.mean(axis=0, keepdims=True)
    Cy = Cy - Cy.mean(axis=0, keepdims=True)
    Cd = Cd - Cd.mean(axis=0, keepdims=True)
    return NystromSketch(
        landmark_indices=idx,
        Cx=Cx, Cy=Cy, Cd=Cd,
        Wx=Wx, Wy=Wy, Wd=Wd,
        Wt_x=Wt_x, Wt_y=Wt_y, Wt_d=Wt_d,
        jitter_x=jx, jitter_y=jy, jitter_d=jd,
        Sxx=Cx.T @ Cx, Sxy=Cx.T @ Cy, Sxd=Cx.T @ Cd,
        Syy=Cy.T @ Cy, Sdd=Cd.T @ Cd,
        approx_row_means=approx_row_means,
    )


def compute_omega(sk: NystromSketch, N: int, epsilon: float,
                  zero_domain: bool = False) -> np.ndarray:
    """M x M reduction matrix of the sketched eigenproblem.

    Direct form (left factor inverted against the right factor):

      lhs = Wt_x Sxd Wt_d (Sdd Wt_d + N eps I)^-1 Sdx Wt_x Sxx Wt_x Sxx
            + Wt_x Sxx Wt_x Sxx + N eps I
      rhs = Wt_x Sxy Wt_y (Syy Wt_y + N eps I)^-1 Syx Wt_x Sxx Wt_x
            + Wt_x Sxx Wt_x

    evaluated here with every Wt (S Wt + a I)^-1 collapsed to
    (S + a Wj)^-1 and the leading Wt_x factored out of the inversion.
    zero_domain drops the Sxd term (the single-domain degeneration).
    """
    if epsilon <= 0:
        raise InvalidInput("epsilon must be positive")
    M = sk.Sxx.shape[0]
    Ne = N * epsilon
    Wxj = sk.Wx + sk.jitter_x * np.eye(M)
    Wyj = sk.Wy + sk.jitter_y * np.eye(M)
    E = np.linalg.solve(Wxj, sk.Sxx)
    lhs = sk.Sxx @ E + Ne * Wxj
    if not zero_domain:
        Wdj = sk.Wd + sk.jitter_d * np.eye(M)
        Dmid = np.linalg.solve(sk.Sdd + Ne * Wdj, sk.Sdx)
        lhs = sk.Sxd @ Dmid @ E @ E + lhs
    Ymid = np.linalg.solve(sk.Syy + Ne * Wyj, sk.Syx)
    rhs = (sk.Sxy @ Ymid @ E + sk.Sxx) @ sk.Wt_x
    omega = np.linalg.solve(lhs, rhs)
    if not np.all(np.isfinite(omega)):
        raise InvalidInput("omega evaluation produced non-finite entries")
    return omega


def _fast_eig_raw(sk: NystromSketch, omega: np.ndarray):
    """Rank-truncated recovery, keeping the complex spectrum for callers
    that enforce the retained-eigenvalue policy themselves."""
    pairs = sym_eig(sk.Sxx)
    lam2 = pairs.values
    keep = lam2 > _RANK_TOL * max(lam2[0], 0.0)
    if not np.any(keep):
        raise RankDeficient("sketched input Gram has no numerical rank")
    Vr = pairs.vectors[:, keep]
    lam2 = lam2[keep]
    G = (Vr.T @ omega @ Vr) * lam2[None, :]
    w, Theta = sla.eig(G)
    order = np.argsort(-w.real, kind="stable")
    w = w[order]
    Theta = Theta[:, order]
    coefs = sk.Cx @ (Vr @ Theta.real)
    return w, coefs


def fast_eig(sk: NystromSketch, omega: np.ndarray, m: int | None = None):
    """Eigenvector recovery: coefficients C_x V Theta and eigenvalues,
    sorted by descending real part. Columns beyond the numerical rank of
    the sketch are dropped; requesting more than the effective rank via m
    raises RankDeficient."""
    w, coefs = _fast_eig_raw(sk, omega)
    if m is not None and coefs.shape[1] < m:
        raise RankDeficient(
            f"effective rank {coefs.shape[1]} is below the requested {m}"
        )
    return coefs, w.real


def _fit_fast(data: DataSet, spec_x, spec_y, spec_d, epsilon, m, M, seed,
              algorithm, zero_domain) -> ProjectionModel:
    N = len(data)
    if not 1 <= m <= M:
        raise InvalidInput(f"m must be in [1, M={M}], got {m}")
    if M > N:
        raise InvalidInput(f"M={M} exceeds the sample count {N}")
    idx = sample_landmarks(N, M, seed)
    sk = build_sketch(data, spec_x, idx, spec_y=spec_y, spec_d=spec_d)
    omega = compute_omega(sk, N, epsilon, zero_domain=zero_domain)
    w, coefs = _fast_eig_raw(sk, omega)
    if coefs.shape[1] < m:
        raise RankDeficient(
            f"effective rank {coefs.shape[1]} is below the requested {m}"
        )
    w = w[:m]
    bad = np.abs(w.imag) > IMAG_TOL * (1.0 + np.abs(w.real))
    if np.any(bad):
        raise ComplexSpectrum(
            "retained eigenvalue has a non-negligible imaginary part; "
            "increase M or epsilon"
        )
    coefs = coefs[:, :m].copy()
    # unit norm under the centered approximated Gram, evaluated as
    # t^T Wt_x t with t = Cx^T beta (never forms an N x N matrix)
    Wxj = sk.Wx + sk.jitter_x * np.eye(M)
    for col in range(m):
        t = sk.Cx.T @ coefs[:, col]
        s = abs(float(t @ np.linalg.solve(Wxj, t)))
        if s < 1e-300:
            raise RankDeficient("projection direction has zero norm under the sketch")
        coefs[:, col] /= np.sqrt(s)
    coefs = _canonical_signs(coefs)
    return ProjectionModel(
        algorithm=algorithm,
        coefficients=coefs,
        eigenvalues=w.real,
        train_X=data.X.copy(),
        spec_x=spec_x,
        row_means=sk.approx_row_means,
        landmarks=idx,
    )


def fit_fastdcm(data: DataSet, spec_x: KernelSpec, epsilon: float, m: int,
                M: int, seed: int,
                spec_y: KernelSpec | None = None,
                spec_d: KernelSpec | None = None) -> ProjectionModel:
    """Landmark-approximated fit; requires m <= M <= N.

    The returned model projects new data exactly like the dense fit: the
    full training-to-test cross kernel is applied to the coefficients,
    with centering statistics taken from the approximated training
    kernel (exact when M = N).
    """
    return _fit_fast(data, spec_x, spec_y, spec_d, epsilon, m, M, seed,
                     "fastdcm", zero_domain=False)


def fit_fastcoir(data: DataSet, spec_x: KernelSpec, epsilon: float, m: int,
                 M: int, seed: int,
                 spec_y: KernelSpec | None = None) -> ProjectionModel:
    """Landmark-approximated single-domain degeneration (domain blocks
    zeroed inside the reduction)."""
    return _fit_fast(data, spec_x, spec_y, None, epsilon, m, M, seed,
                     "fastcoir", zero_domain=True)
