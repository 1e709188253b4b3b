"""
Least-squares fitting and fit statistics.

The solver is a column-pivoted Householder QR (LAPACK ``geqp3`` through
SciPy). A pivot whose magnitude falls below ``RANK_RTOL`` times the leading
pivot marks the design as rank deficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .basis import DesignMatrix
from .exceptions import ContractError, InsufficientDataError, SingularDesignError

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """Outcome of one least-squares fit.

    Attributes
    ----------
    coefficients : ndarray
        Estimates in design-matrix column order.
    rss : float
        Residual sum of squares.
    tss : float
        Total sum of squares about the mean of ``y``.
    r2, r2_adj : float
        Coefficient of determination and its adjusted form
        ``1 - (1 - r2) (n - 1) / (n - p)``. Both are 0 when ``tss == 0``.
    n, p : int
        Observations and columns (intercept included).
    t_stats : ndarray
        ``coefficient / standard error``; ``inf`` or ``nan`` on a perfect fit.
    sigma2_hat : float
        ``rss / (n - p)``.
    fitted : ndarray
        Fitted values.
    column_roles : tuple of str
    """

    coefficients: np.ndarray
    rss: float
    tss: float
    r2: float
    r2_adj: float
    n: int
    p: int
    t_stats: np.ndarray
    sigma2_hat: float
    fitted: np.ndarray
    column_roles: tuple


def total_sum_of_squares(y) -> float:
    y = np.asarray(y, dtype=float)
    if np.ptp(y) == 0:
        return 0.0
    return float(np.sum((y - y.mean()) ** 2))


def fit_ols(X, y) -> FitResult:
    """Fit ``y ~ X`` by least squares.

    Parameters
    ----------
    X : DesignMatrix or ndarray, shape (n, p)
    y : array_like, shape (n,)

    Raises
    ------
    InsufficientDataError
        If ``n <= p``; there must be at least one residual degree of freedom.
    SingularDesignError
        If the pivoted QR finds the columns numerically dependent; the error
        names the dependent column roles.
    """
    if isinstance(X, DesignMatrix):
        A, roles = np.asarray(X.values, dtype=float), tuple(X.column_roles)
    else:
        A = np.asarray(X, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        roles = tuple(f"col{j}" for j in range(A.shape[1]))
    y = np.asarray(y, dtype=float).ravel()
    n, p = A.shape
    if y.size != n:
        raise ContractError(f"X has {n} rows but y has {y.size} entries")
    if n <= p:
        raise InsufficientDataError(f"need n > p, got n={n}, p={p}")

    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_RTOL * diag[0])) if diag[0] > 0 else 0
    if rank < p:
        dependent = tuple(roles[j] for j in sorted(piv[rank:]))
        raise SingularDesignError(
            f"design matrix has rank {rank} < {p}; dependent columns: {', '.join(dependent)}",
            dependent_roles=dependent,
        )

    qty = Q.T @ y
    beta_piv = linalg.solve_triangular(R, qty, check_finite=False)
    beta = np.empty(p)
    beta[piv] = beta_piv

    fitted = A @ beta
    rss = float(np.sum((y - fitted) ** 2))
    tss = total_sum_of_squares(y)
    if tss > 0:
        r2 = 1.0 - rss / tss
        r2_adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p)
    else:
        r2 = r2_adj = 0.0
    sigma2 = rss / (n - p)

    R_inv = linalg.solve_triangular(R, np.eye(p), check_finite=False)
    se = np.empty(p)
    se[piv] = np.sqrt(sigma2 * np.sum(R_inv ** 2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = beta / se

    return FitResult(
        coefficients=beta,
        rss=rss,
        tss=tss,
        r2=r2,
        r2_adj=r2_adj,
        n=n,
        p=p,
        t_stats=t_stats,
        sigma2_hat=sigma2,
        fitted=fitted,
        column_roles=roles,
    )


def bic(rss: float, n: int, p: int) -> float:
    """Gaussian BIC ``n ln(rss / n) + (p + 1) ln n``.

    ``p`` counts regression coefficients; the extra parameter is the error
    variance.
    """
    if not rss > 0:
        raise ContractError(f"rss must be positive, got {rss!r}")
    if not n > p >= 1:
        raise ContractError(f"need n > p >= 1, got n={n}, p={p}")
    return n * math.log(rss / n) + (p + 1) * math.log(n)
