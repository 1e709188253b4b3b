"""
Best-subsets search over knot terms and the end-to-end K-part pipeline.

The four polynomial columns are always present; every subset of the candidate
knots is fitted and scored by BIC. The lowest BIC wins, ties going to fewer
parameters and then to the lexicographically smallest mask.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .basis import N_BASE, DesignMatrix, KnotSet, build_design_matrix
from .data import CrimeSeries, ScaleTransform, make_scale
from .exceptions import (
    ContractError,
    NoFeasibleModelError,
    SingularDesignError,
)
from .knots import select_knots
from .ols import FitResult, bic, fit_ols, total_sum_of_squares

DEFAULT_MAX_K = 20

# Residual sums below this fraction of TSS are roundoff; flooring them keeps
# exact-fit supersets from winning on noise instead of losing on the penalty.
RSS_FLOOR_REL = 1e-20

FEASIBLE = "ok"
SINGULAR = "singular"
TOO_FEW = "insufficient-data"


def max_k_from_env() -> int:
    raw = os.environ.get("KPART_MAX_K", "")
    if not raw.strip():
        return DEFAULT_MAX_K
    try:
        value = int(raw)
    except ValueError:
        raise ContractError(f"KPART_MAX_K must be an integer, got {raw!r}") from None
    if value < 1:
        raise ContractError(f"KPART_MAX_K must be positive, got {value}")
    return value


@dataclass(frozen=True)
class SubsetScore:
    """One row of the BIC table. Infeasible rows carry ``bic = inf``."""

    mask: tuple
    bic: float
    rss: float
    p: int
    status: str = FEASIBLE

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def sort_key(self):
        return (self.bic, self.p, self.mask)


@dataclass(frozen=True)
class ModelSelectionResult:
    winning_mask: tuple
    winner: FitResult
    winner_bic: float
    knots: KnotSet
    scale: ScaleTransform
    bic_table: tuple
    k_requested: Optional[int] = None
    selected_years: tuple = field(default=())

    @property
    def winning_knots(self) -> KnotSet:
        return self.knots.subset(self.winning_mask)

    @property
    def knots_raw(self) -> np.ndarray:
        """Winning knot locations in raw predictor units."""
        return self.scale.inverse(self.winning_knots.locations)

    @property
    def n_knots(self) -> int:
        return sum(self.winning_mask)


def score_rss(rss: float, tss: float) -> float:
    """RSS as it enters the BIC: floored at ``RSS_FLOOR_REL * tss``.

    A constant response (``tss == 0``) is fitted exactly by every subset, so
    its RSS is treated as zero and floored at the smallest normal double.
    """
    if tss > 0:
        return max(rss, RSS_FLOOR_REL * tss)
    return np.finfo(float).tiny


def select_winner(rows: Sequence[SubsetScore]) -> SubsetScore:
    """Pick the minimum-BIC feasible row; independent of row order."""
    feasible = [r for r in rows if r.feasible]
    if not feasible:
        raise NoFeasibleModelError("no knot subset produced a feasible fit")
    return min(feasible, key=SubsetScore.sort_key)


def all_masks(m: int):
    return list(itertools.product((False, True), repeat=m))


def _subset_design(full: DesignMatrix, mask) -> DesignMatrix:
    cols = list(range(N_BASE)) + [N_BASE + j for j, keep in enumerate(mask) if keep]
    return DesignMatrix(full.values[:, cols], tuple(full.column_roles[c] for c in cols))


def best_subsets(
    x,
    y,
    knots: KnotSet,
    *,
    scale: Optional[ScaleTransform] = None,
    years: Optional[Sequence[int]] = None,
    k_requested: Optional[int] = None,
    max_knots: int = DEFAULT_MAX_K,
) -> ModelSelectionResult:
    """Fit every subset of ``knots`` on top of the cubic base and keep the best.

    Parameters
    ----------
    x, y : array_like, shape (n,)
        Predictor (in the same units as the knot locations) and response.
    knots : KnotSet
        Candidate knots; ``2 ** len(knots)`` subsets are fitted.
    scale : ScaleTransform, optional
        Transform that produced ``x``; stored on the result so knots can be
        reported in raw units. Identity when omitted.
    years : sequence of int, optional
        Year of each observation, used to report the winning knots' years.
    k_requested : int, optional
        Recorded on the result.
    max_knots : int
        Refuse to enumerate more candidates than this.

    Raises
    ------
    NoFeasibleModelError
        When no subset, not even the pure cubic, can be fitted.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ContractError(f"x and y differ in length ({x.size} vs {y.size})")
    m = len(knots)
    if m > max_knots:
        raise ContractError(f"{m} candidate knots exceeds the cap of {max_knots}")

    n = y.size
    tss = total_sum_of_squares(y)
    full = build_design_matrix(x, knots)
    rows = []
    fits = {}
    for mask in all_masks(m):
        p = N_BASE + sum(mask)
        if n < p + 2:
            rows.append(SubsetScore(mask, np.inf, np.nan, p, TOO_FEW))
            continue
        try:
            fit = fit_ols(_subset_design(full, mask), y)
        except SingularDesignError:
            rows.append(SubsetScore(mask, np.inf, np.nan, p, SINGULAR))
            continue
        fits[mask] = fit
        rows.append(SubsetScore(mask, bic(score_rss(fit.rss, tss), n, p), fit.rss, p))

    best = select_winner(rows)
    winning_knots = knots.subset(best.mask)
    selected_years = ()
    if years is not None:
        years = list(years)
        selected_years = tuple(int(years[k.source]) for k in winning_knots)
    return ModelSelectionResult(
        winning_mask=best.mask,
        winner=fits[best.mask],
        winner_bic=best.bic,
        knots=knots,
        scale=scale if scale is not None else ScaleTransform(0.0, 1.0),
        bic_table=tuple(rows),
        k_requested=k_requested,
        selected_years=selected_years,
    )


def fit_kpart(series: CrimeSeries, K: int, max_k: Optional[int] = None) -> ModelSelectionResult:
    """Run the whole pipeline on one series.

    Population is the predictor and the rate is the response. The predictor is
    rescaled to ``[0, 1]``, candidate knots are nominated by the min/max
    K-partition rule, and the best knot subset is chosen by BIC. All ``n``
    observations enter every fit, including the trailing remainder that
    nominates no knot.
    """
    cap = max_k_from_env() if max_k is None else max_k
    n = len(series)
    if not 1 <= K <= n:
        raise ContractError(f"need 1 <= K <= n, got K={K}, n={n}")
    if K > cap:
        raise ContractError(f"K={K} exceeds the cap of {cap}")
    scale = make_scale(series.population)
    x = scale.forward(series.population)
    y = series.rate
    knots = select_knots(x, y, K)
    return best_subsets(
        x, y, knots, scale=scale, years=series.years, k_requested=K, max_knots=cap
    )
