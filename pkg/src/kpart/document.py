"""JSON model document written by ``kpart fit`` and read by ``kpart curve``."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .basis import Knot, KnotSet, evaluate_spline
from .data import ScaleTransform
from .exceptions import DataFormatError

SCHEMA_VERSION = "1"


def _finite_or_none(values):
    return [float(v) if math.isfinite(v) else None for v in values]


@dataclass(frozen=True)
class ModelDocument:
    schema_version: str
    series_name: str
    k_requested: int
    knots_raw_units: tuple
    knots_scaled: tuple
    selected_years: tuple
    coefficients_scaled: tuple
    scale: tuple
    r2: float
    r2_adj: float
    bic: float
    n: int
    p: int
    t_stats: tuple

    @classmethod
    def from_result(cls, result, series_name: str) -> "ModelDocument":
        fit = result.winner
        winning = result.winning_knots
        return cls(
            schema_version=SCHEMA_VERSION,
            series_name=series_name,
            k_requested=int(result.k_requested) if result.k_requested is not None else 0,
            knots_raw_units=tuple(float(v) for v in result.knots_raw),
            knots_scaled=tuple(float(v) for v in winning.locations),
            selected_years=tuple(int(v) for v in result.selected_years),
            coefficients_scaled=tuple(float(v) for v in fit.coefficients),
            scale=(float(result.scale.shift), float(result.scale.scale)),
            r2=float(fit.r2),
            r2_adj=float(fit.r2_adj),
            bic=float(result.winner_bic),
            n=int(fit.n),
            p=int(fit.p),
            # None marks an undefined statistic (perfect fit)
            t_stats=tuple(_finite_or_none(fit.t_stats)),
        )

    @property
    def transform(self) -> ScaleTransform:
        return ScaleTransform(*self.scale)

    @property
    def raw_range(self):
        shift, scale = self.scale
        return shift, shift + scale

    def predict(self, x_raw) -> np.ndarray:
        """Evaluate the fitted curve at raw predictor values."""
        knots = KnotSet(tuple(Knot(t, i, -1) for i, t in enumerate(self.knots_scaled)))
        xs = self.transform.forward(np.atleast_1d(np.asarray(x_raw, dtype=float)))
        return evaluate_spline(self.coefficients_scaled, knots, None, xs)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ModelDocument":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"model document is not valid JSON: {exc}") from None
        names = {f.name for f in fields(cls)}
        if not isinstance(raw, dict) or not names <= raw.keys():
            missing = sorted(names - set(raw)) if isinstance(raw, dict) else sorted(names)
            raise DataFormatError(f"model document missing fields: {', '.join(missing)}")
        if raw["schema_version"] != SCHEMA_VERSION:
            raise DataFormatError(f"unsupported schema_version {raw['schema_version']!r}")
        doc = {k: raw[k] for k in names}
        for key in ("knots_raw_units", "knots_scaled", "selected_years",
                    "coefficients_scaled", "scale", "t_stats"):
            doc[key] = tuple(doc[key])
        if len(doc["coefficients_scaled"]) != 4 + len(doc["knots_scaled"]):
            raise DataFormatError("coefficient count does not match the knot count")
        return cls(**doc)

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ModelDocument":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
