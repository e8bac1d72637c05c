"""Hermitian eigendecomposition services.

The dense path delegates to LAPACK (numpy.linalg.eigh), which resolves the
1e-5-scale relative gaps these matrices exhibit.  An opt-in iterative path
runs shifted power iteration for the smallest eigenpair and never
materializes the operator, for use at scales where the dense decomposition
is too costly.  All returned eigenvectors are phase-canonicalized (largest-
magnitude entry made real and positive) so results are deterministic.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, PowerIterationError

#: Two smallest eigenvalues closer than this (relative to the largest) are
#: treated as degenerate: the minimizer is no longer essentially unique.
DEGENERACY_RTOL = 1e-12


def canonical_phase(v):
    """Rotate a vector's global phase so its largest-magnitude entry is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if pivot == 0:
        return v.copy()
    return v * (np.conj(pivot) / abs(pivot))


@dataclass(frozen=True)
class EigenResult:
    """Full Hermitian spectrum, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residual: float


@dataclass(frozen=True)
class GapInfo:
    lambda_min: float
    lambda_second: float
    gap_ratio: float


@dataclass(frozen=True)
class DavisKahanReport:
    premise_holds: bool
    lhs: float
    rhs: float
    gap: float
    perturbation_norm: float


def _check_matrix(A):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix contains non-finite entries")
    return (A + A.conj().T) / 2


def eig_hermitian(A, compute_vectors=True):
    """Full eigendecomposition of a Hermitian matrix.

    The input is symmetrized first; eigenvalues are returned in descending
    order with matching phase-canonicalized eigenvector columns. `residual`
    is max_i ||A v_i - lambda_i v_i||_2 / ||A||_F.
    """
    A = _check_matrix(A)
    if not compute_vectors:
        w = np.linalg.eigvalsh(A)[::-1]
        return EigenResult(eigenvalues=w, eigenvectors=None, residual=0.0)
    w, V = np.linalg.eigh(A)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    for j in range(V.shape[1]):
        V[:, j] = canonical_phase(V[:, j])
    norm_a = np.linalg.norm(A)
    if norm_a > 0:
        residual = float(np.max(np.linalg.norm(A @ V - V * w[None, :], axis=0)) / norm_a)
    else:
        residual = 0.0
    return EigenResult(eigenvalues=w, eigenvectors=V, residual=residual)


def _as_apply(A, dim):
    if callable(A):
        if dim is None:
            raise InputError("matrix-free operator requires an explicit dimension")
        return A, int(dim)
    A = _check_matrix(A)
    return (lambda v: A @ v), A.shape[0]


def smallest_eigvec(A, dim=None, method="dense", tol=1e-10, max_iter=10000, rng=None):
    """Smallest eigenpair (lambda_min, unit eigenvector) of a Hermitian PSD operator.

    method="dense" (default) takes the full decomposition.  method="power"
    estimates lambda_max with 50 power steps, then runs power iteration on
    the reflected operator sigma*I - A with sigma = 1.01 * lambda_max,
    stopping when successive iterates have sin-angle < tol.  The iterative
    path accepts a matrix-free callable plus `dim` and raises
    PowerIterationError (carrying the final residual) on non-convergence;
    callers may fall back to the dense path.
    """
    if method == "dense":
        res = eig_hermitian(A)
        return float(res.eigenvalues[-1]), res.eigenvectors[:, -1]
    if method != "power":
        raise InputError(f"unknown method {method!r}")
    apply_a, n = _as_apply(A, dim)
    rng = rng if rng is not None else np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(50):
        w = apply_a(v)
        nw = np.linalg.norm(w)
        if nw == 0:  # A v = 0: v is already an exact null vector
            return 0.0, canonical_phase(v)
        v = w / nw
    lam_max = float(np.real(np.vdot(v, apply_a(v))))
    sigma = 1.01 * lam_max if lam_max > 0 else 1.0
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    last = np.inf
    for _ in range(max_iter):
        w = sigma * v - apply_a(v)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w /= nw
        # sin-angle between unit iterates via the projection residual, which
        # stays accurate where 1 - |<w,v>|^2 would cancel to zero
        last = np.linalg.norm(w - v * np.vdot(v, w))
        v = w
        if last < tol:
            lam = float(np.real(np.vdot(v, apply_a(v))))
            return lam, canonical_phase(v)
    raise PowerIterationError(
        f"power iteration did not reach sin-angle {tol:g} in {max_iter} steps", residual=last
    )


def spectral_gap(A):
    """Two smallest eigenvalues and the ratio lambda_second / lambda_max."""
    A = _check_matrix(A)
    if A.shape[0] < 2:
        raise InputError("need dimension >= 2 for a spectral gap")
    w = np.linalg.eigvalsh(A)
    lam_max = w[-1]
    ratio = float(w[1] / lam_max) if lam_max != 0 else np.inf
    return GapInfo(lambda_min=float(w[0]), lambda_second=float(w[1]), gap_ratio=ratio)


def is_degenerate(eigenvalues_desc, rtol=DEGENERACY_RTOL):
    """True when the two smallest eigenvalues coincide within rtol * lambda_max."""
    w = np.asarray(eigenvalues_desc)
    scale = abs(w[0])
    return bool(w[-2] - w[-1] <= rtol * scale)


def davis_kahan_check(A, E):
    """Evaluate the sin-theta perturbation bound for the smallest eigenvector.

    With gap = lambda_{n-1}(A) - lambda_n(A), the premise is
    ||E|| <= gap / 5; when it holds, the report compares

        lhs = sin-angle between the smallest eigenvectors of A and A + E
        rhs = 4 ||E q||_2 / gap

    Report-only: no exception is raised when the bound fails.
    """
    from .metrics import sin_angle  # local import to avoid a cycle

    A = _check_matrix(A)
    E = _check_matrix(E)
    w, V = np.linalg.eigh(A)
    q = V[:, 0]
    gap = float(w[1] - w[0])
    e_norm = float(np.linalg.norm(E, 2))
    premise = e_norm <= gap / 5
    _, Vp = np.linalg.eigh(A + E)
    q_hat = Vp[:, 0]
    lhs = sin_angle(q, q_hat) if np.linalg.norm(q_hat) > 0 else 0.0
    rhs = 4 * float(np.linalg.norm(E @ q)) / gap if gap > 0 else np.inf
    if e_norm == 0:
        lhs, rhs = 0.0, 0.0
    return DavisKahanReport(
        premise_holds=bool(premise), lhs=float(lhs), rhs=float(rhs), gap=gap,
        perturbation_norm=e_norm,
    )
