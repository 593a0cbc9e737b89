"""Small dense symmetric linear algebra for AR(1)-Toeplitz and tridiagonal structures"""

from typing import Callable, Tuple, Union

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from .errors import (
    DimensionMismatch,
    InvalidParams,
    InvalidRho,
    NotPositiveDefinite,
    SingularUpdate,
)
from .types import SymMatrix, UvSequences


PD_TOL = 1e-12
SINGULAR_TOL = 1e-14

MatrixLike = Union[SymMatrix, np.ndarray]


def _as_square(A: MatrixLike) -> np.ndarray:
    if isinstance(A, SymMatrix):
        return A.to_array()
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {arr.shape}")
    return arr


def _check_rho(rho: float):
    if not -1 < rho < 1:
        raise InvalidRho(f"rho must lie in (-1, 1), got {rho}")


def ldl_factor(A: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    LDL^T factorisation with a positive-definite pivot check.

    Args:
        A: Symmetric matrix

    Returns:
        Unit lower-triangular L and pivot vector d with A = L diag(d) L^T
    """
    arr = _as_square(A)
    n = arr.shape[0]
    max_diag = float(np.max(np.diag(arr))) if n else 0.0
    tol = PD_TOL * max_diag
    if not max_diag > 0:
        raise NotPositiveDefinite("Matrix has no positive diagonal entry")

    L = np.eye(n)
    d = np.zeros(n)
    for j in range(n):
        d[j] = arr[j, j] - np.dot(L[j, :j] ** 2, d[:j])
        if d[j] <= tol:
            raise NotPositiveDefinite(
                f"Pivot {j + 1} = {d[j]:.3e} is below tolerance {tol:.3e}"
            )
        L[j + 1:, j] = (arr[j + 1:, j] - (L[j + 1:, :j] * d[:j]) @ L[j, :j]) / d[j]
    return L, d


def solve_spd(A: MatrixLike, b) -> np.ndarray:
    """
    Solve A x = b for a symmetric positive definite A.

    Args:
        A: SymMatrix or square array
        b: Right-hand side of length A.dim

    Returns:
        Solution vector x
    """
    arr = _as_square(A)
    rhs = np.asarray(b, dtype=float).ravel()
    if rhs.shape[0] != arr.shape[0]:
        raise DimensionMismatch(
            f"Right-hand side has length {rhs.shape[0]}, matrix dimension is {arr.shape[0]}"
        )
    L, d = ldl_factor(arr)
    z = solve_triangular(L, rhs, lower=True, unit_diagonal=True)
    return solve_triangular(L.T, z / d, lower=False, unit_diagonal=True)


def ar1_toeplitz(T: int, rho: float) -> SymMatrix:
    """AR(1) correlation matrix with entries rho^|i-j|"""
    _check_rho(rho)
    if T < 1:
        raise InvalidParams(f"T must be at least 1, got {T}")
    return SymMatrix(toeplitz(float(rho) ** np.arange(T)))


def _tridiag_pattern(T: int, rho: float) -> np.ndarray:
    diag = np.full(T, 1.0 + rho ** 2)
    diag[0] = diag[-1] = 1.0
    off = np.full(T - 1, -float(rho))
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def ar1_toeplitz_inverse(T: int, rho: float) -> SymMatrix:
    """Closed-form inverse of the AR(1) correlation matrix (tridiagonal)"""
    _check_rho(rho)
    if T < 2:
        raise InvalidParams(f"T must be at least 2, got {T}")
    return SymMatrix(_tridiag_pattern(T, rho) / (1.0 - rho ** 2))


def tridiag_star(xi, rho: float) -> SymMatrix:
    """(1 - rho^2) * ar1_toeplitz_inverse(T, rho) + diag(xi)"""
    xi = np.asarray(xi, dtype=float)
    _check_rho(rho)
    if xi.shape[0] < 2:
        raise InvalidParams("xi must have at least two entries")
    return SymMatrix(_tridiag_pattern(xi.shape[0], rho) + np.diag(xi))


def tridiag_uv(xi, rho: float) -> UvSequences:
    """
    Forward/backward recursions for the inverse of tridiag_star(xi, rho).

    Args:
        xi: Positive diagonal shifts xi_1..xi_T
        rho: Autocorrelation in (-1, 1)

    Returns:
        UvSequences whose last column v_T * u is the last column of the inverse
    """
    xi = np.asarray(xi, dtype=float)
    _check_rho(rho)
    T = xi.shape[0]
    if T < 2:
        raise InvalidParams("xi must have at least two entries")
    if np.any(xi <= 0):
        raise InvalidParams("All xi_t must be positive")
    r2 = rho ** 2

    d = np.empty(T)
    d[T - 1] = 1.0 + xi[T - 1]
    for t in range(T - 2, 0, -1):
        d[t] = 1.0 + r2 + xi[t] - r2 / d[t + 1]
    d[0] = 1.0 + xi[0] - r2 / d[1]

    delta = np.empty(T)
    delta[0] = 1.0 + xi[0]
    for t in range(1, T - 1):
        delta[t] = 1.0 + r2 + xi[t] - r2 / delta[t - 1]
    delta[T - 1] = 1.0 + xi[T - 1] - r2 / delta[T - 2]

    v = np.empty(T)
    v[0] = 1.0 / d[0]
    for t in range(1, T):
        v[t] = rho / d[t] * v[t - 1]

    # last column w = v_T * u, built backwards from w_T = 1 / delta_T
    w = np.empty(T)
    w[T - 1] = 1.0 / delta[T - 1]
    for t in range(T - 2, -1, -1):
        w[t] = rho / delta[t] * w[t + 1]

    if v[T - 1] != 0:
        u = w / v[T - 1]
    else:
        # rho = 0: v_T vanishes and u carries the last column itself
        u = w
    return UvSequences(d=d, delta=delta, u=u, v=v, rho=float(rho), xi=xi)


def last_column_inverse(uv: UvSequences) -> np.ndarray:
    """Last column of tridiag_star(xi, rho)^{-1}"""
    return uv.last_column()


def rank_one_update_solve(base_inverse_applier: Union[Callable, MatrixLike], c: float,
                          rhs) -> np.ndarray:
    """
    Solve (M + c E) x = rhs where E is the all-ones matrix (Sherman-Morrison).

    Args:
        base_inverse_applier: Callable returning M^{-1} y, or the matrix M itself
        c: Weight of the all-ones update
        rhs: Right-hand side

    Returns:
        Solution vector x
    """
    rhs = np.asarray(rhs, dtype=float).ravel()
    if callable(base_inverse_applier):
        apply_inv = base_inverse_applier
    else:
        M = _as_square(base_inverse_applier)
        if M.shape[0] != rhs.shape[0]:
            raise DimensionMismatch("Matrix and right-hand side dimensions differ")

        def apply_inv(y):
            return np.linalg.solve(M, y)

    ones = np.ones_like(rhs)
    m_rhs = np.asarray(apply_inv(rhs), dtype=float)
    m_ones = np.asarray(apply_inv(ones), dtype=float)
    denom = 1.0 + c * float(np.sum(m_ones))
    if abs(denom) < SINGULAR_TOL:
        raise SingularUpdate(f"Sherman-Morrison denominator {denom:.3e} is singular")
    return m_rhs - c * m_ones * float(np.sum(m_rhs)) / denom


def model1_dense_inverse(sigma2: float, rho: float, lambdas, q_star) -> np.ndarray:
    """(I + sigma^-2 Q* L^-1 S^-1 L^-1)^-1 evaluated densely"""
    lam = np.asarray(lambdas, dtype=float)
    q = np.asarray(q_star, dtype=float)
    T = lam.shape[0]
    s_inv = ar1_toeplitz_inverse(T, rho).to_array()
    inner = np.eye(T) + np.diag(q / lam) @ s_inv @ np.diag(1.0 / lam) / sigma2
    return np.linalg.inv(inner)


def woodbury_model1_inverse(sigma2: float, rho: float, lambdas, q_star) -> np.ndarray:
    """sigma^2 (1 - rho^2) L (Sigma*)^-1 L (Q*)^-1, the tridiagonal route to model1_dense_inverse"""
    lam = np.asarray(lambdas, dtype=float)
    q = np.asarray(q_star, dtype=float)
    xi = sigma2 * (1.0 - rho ** 2) * lam ** 2 / q
    star = tridiag_star(xi, rho).to_array()
    star_inv = np.linalg.inv(star)
    return sigma2 * (1.0 - rho ** 2) * (lam[:, None] * star_inv * lam[None, :]) / q[None, :]
