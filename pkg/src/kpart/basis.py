"""
Truncated power basis for cubic regression splines.

The mean function is

    E(y) = b0 + b1 x + b2 x^2 + b3 x^3 + sum_k c_k (x - t_k)_+^3

with ``(x - t)_+^3 = 0`` whenever ``x <= t``. Columns of a design matrix are
always ordered intercept, x, x^2, x^3, then the included knot terms in
increasing knot location.

Everything here works on float arrays and also on numpy object arrays of
exact numbers (``fractions.Fraction``); nothing coerces object input to float.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import ContractError

BASE_ROLES = ("intercept", "x", "x^2", "x^3")
N_BASE = len(BASE_ROLES)


def _as_array(x):
    x = np.asarray(x)
    if x.dtype != object:
        x = x.astype(float)
    return x


def truncated_cubic(x, t):
    """Evaluate ``(x - t)_+^3``; zero at and below the knot."""
    d = np.subtract(_as_array(x), t)
    out = np.where(d > 0, d ** 3, d * 0)
    return out[()]


@dataclass(frozen=True)
class Knot:
    location: float
    partition: int
    source: int


@dataclass(frozen=True)
class KnotSet:
    """Candidate knots, strictly increasing in location.

    ``partition`` is the 0-based partition that nominated the knot and
    ``source`` the 0-based index of the observation whose predictor value it
    copies.
    """

    knots: tuple = ()

    def __post_init__(self):
        knots = tuple(self.knots)
        object.__setattr__(self, "knots", knots)
        locs = [k.location for k in knots]
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ContractError("knot locations must be strictly increasing")

    @classmethod
    def from_candidates(cls, candidates: Sequence[Knot], x_max) -> "KnotSet":
        """Normalize raw candidates into a valid set.

        Duplicated locations keep the candidate with the lowest partition
        index. Knots at or beyond ``x_max`` are dropped because their basis
        column vanishes on the data.
        """
        seen = {}
        for k in sorted(candidates, key=lambda k: k.partition):
            if k.location >= x_max:
                continue
            seen.setdefault(k.location, k)
        return cls(tuple(sorted(seen.values(), key=lambda k: k.location)))

    def __len__(self):
        return len(self.knots)

    def __iter__(self):
        return iter(self.knots)

    @property
    def locations(self) -> np.ndarray:
        return _as_array([k.location for k in self.knots])

    @property
    def sources(self) -> tuple:
        return tuple(k.source for k in self.knots)

    def subset(self, mask) -> "KnotSet":
        mask = _check_mask(mask, len(self))
        return KnotSet(tuple(k for k, keep in zip(self.knots, mask) if keep))


def knot_role(t) -> str:
    return f"knot({float(t):.12g})"


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    column_roles: tuple

    @property
    def shape(self):
        return self.values.shape


def _check_mask(mask, n_knots):
    if mask is None:
        return np.ones(n_knots, dtype=bool)
    mask = np.asarray(mask, dtype=bool).ravel()
    if mask.size != n_knots:
        raise ContractError(f"mask has length {mask.size}, expected {n_knots}")
    return mask


def build_design_matrix(x, knots: KnotSet, mask: Optional[Sequence[bool]] = None) -> DesignMatrix:
    """Assemble the cubic spline design matrix.

    Parameters
    ----------
    x : array_like, shape (n,)
        Predictor values.
    knots : KnotSet
        Candidate knots.
    mask : sequence of bool, optional
        Which knots to include; all of them when omitted.

    Returns
    -------
    DesignMatrix
        ``n x (4 + mask.sum())`` matrix with its column roles.
    """
    x = _as_array(x).ravel()
    if x.size == 0:
        raise ContractError("x must be nonempty")
    mask = _check_mask(mask, len(knots))
    locs = knots.locations[mask]
    if x.dtype == object:
        one = np.array([x[0] ** 0] * x.size, dtype=object)
    else:
        one = np.ones_like(x)
    cols = [one, x, x ** 2, x ** 3]
    cols.extend(truncated_cubic(x, t) for t in locs)
    roles = BASE_ROLES + tuple(knot_role(t) for t in locs)
    values = np.column_stack(cols)
    return DesignMatrix(values=values, column_roles=roles)


def evaluate_spline(coefficients, knots: KnotSet, mask, x_grid) -> np.ndarray:
    """Evaluate the fitted mean function on ``x_grid``.

    ``coefficients`` follow the design-matrix column order for ``mask``.
    """
    coefficients = _as_array(coefficients).ravel()
    mask = _check_mask(mask, len(knots))
    expected = N_BASE + int(mask.sum())
    if coefficients.size != expected:
        raise ContractError(
            f"got {coefficients.size} coefficients, expected {expected} "
            f"for {int(mask.sum())} active knots"
        )
    X = build_design_matrix(x_grid, knots, mask).values
    return X @ coefficients
