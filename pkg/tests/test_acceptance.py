"""
Acceptance suite.

Each test is one exit criterion and records a PASS/FAIL/SKIP line that is
printed in the pytest terminal summary. Run just this module with

    pytest tests/test_acceptance.py

Criterion 6 needs the real violent-crime data. Point ``KPART_USA_CSV`` at the
national series (year, population, count or rate for 1960-2014) and
``KPART_STATES_DIR`` at a directory with one CSV per state to enable it.
"""

import contextlib
import csv
import os
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from kpart.basis import Knot, KnotSet, evaluate_spline
from kpart.cli import main
from kpart.data import load_series, make_scale, write_series
from kpart.knots import select_knots
from kpart.search import best_subsets, fit_kpart

from conftest import exact_spline_series, random_series
from oracles import brute_force_best_subsets, spline_columns, well_posed_instance

pytestmark = pytest.mark.acceptance

RESULTS = []

USA_YEARS = (1980, 1989, 1991, 1995, 2006)
USA_R2_ADJ = 0.9889
USA_R2_TOL = 0.005
STATES_ABOVE_90 = 42
STATES_TOL = 3


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except pytest.skip.Exception as exc:
        RESULTS.append(f"[SKIP] {number}. {title}: {exc}")
        raise
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        RESULTS.append(f"[FAIL] {number}. {title}: {msg}")
        raise
    RESULTS.append(f"[PASS] {number}. {title}")


def _knotset(locs):
    return KnotSet(tuple(Knot(float(t), i, i) for i, t in enumerate(locs)))


def test_1_oracle_equivalence():
    with criterion(1, "best_subsets == brute-force enumerator on 200 instances"):
        rng = np.random.default_rng(1001)
        start = time.perf_counter()
        for _ in range(200):
            n = int(rng.integers(20, 61))
            m = int(rng.integers(1, 9))
            x, knots = well_posed_instance(rng, n, m)
            y = rng.normal(size=n)
            res = best_subsets(x, y, _knotset(knots))
            table, winner = brute_force_best_subsets(x, y, list(knots))
            assert res.winning_mask == winner
            assert len(res.bic_table) == 2 ** m
            assert {r.mask for r in res.bic_table} == set(table)
            for row in res.bic_table:
                assert row.feasible
                assert row.bic == pytest.approx(table[row.mask], rel=1e-9, abs=1e-9)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_2_zero_noise_recovery():
    with criterion(2, "zero-noise recovery of a min/max-selected knot, 100 reps"):
        rng = np.random.default_rng(2002)
        cases = []
        for _ in range(100):
            n = int(rng.integers(30, 61))
            K = int(rng.integers(3, 9))
            cases.append((exact_spline_series(rng, n=n, K=K), K))
        start = time.perf_counter()
        for (series, true_source), K in cases:
            res = fit_kpart(series, K)
            fit = res.winner
            assert fit.rss / fit.tss < 1e-8
            assert fit.r2_adj > 0.9999
            assert true_source in res.winning_knots.sources
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def _one_sided(values, h, side):
    """Value and first three derivatives at t from s(t + side*j*h), j = 0..3.

    The stencils are exact for cubics, so each side reproduces its own
    polynomial piece.
    """
    s0, s1, s2, s3 = values
    return (
        s0,
        side * (-11 * s0 + 18 * s1 - 9 * s2 + 2 * s3) / (6 * h),
        (2 * s0 - 5 * s1 + 4 * s2 - s3) / h ** 2,
        side * (-s0 + 3 * s1 - 3 * s2 + s3) / h ** 3,
    )


def test_3_smoothness():
    with criterion(3, "C2 continuity and third-derivative jump 6*beta at every knot, 50 models"):
        rng = np.random.default_rng(3003)
        eps = 1e-4
        eps_q = Fraction(1, 10000)
        checked = 0
        while checked < 50:
            series = random_series(rng, n=int(rng.integers(30, 61)), noise=5e-4)
            res = fit_kpart(series, int(rng.integers(3, 11)))
            ks = res.winning_knots
            if not len(ks):
                continue
            checked += 1
            beta = res.winner.coefficients
            mask = [True] * len(ks)
            exact_ks = KnotSet(tuple(Knot(Fraction(k.location), k.partition, k.source) for k in ks))
            exact_beta = np.array([Fraction(b) for b in beta], dtype=object)
            for k, knot in enumerate(ks):
                t = knot.location
                # float64: value and slope
                pts = np.array([t + side * j * eps for side in (-1, 1) for j in range(4)])
                v = evaluate_spline(beta, ks, mask, pts)
                left, right = _one_sided(v[:4], eps, -1), _one_sided(v[4:], eps, 1)
                assert abs(right[0] - left[0]) <= 1e-6
                assert abs(right[1] - left[1]) <= 1e-6
                # exact rationals: all orders, free of cancellation error
                tq = Fraction(t)
                pts_q = np.array([tq + side * j * eps_q for side in (-1, 1) for j in range(4)], dtype=object)
                vq = evaluate_spline(exact_beta, exact_ks, mask, pts_q)
                lq, rq = _one_sided(vq[:4], eps_q, -1), _one_sided(vq[4:], eps_q, 1)
                for order in range(3):
                    assert abs(float(rq[order] - lq[order])) <= 1e-6
                jump = float(rq[3] - lq[3])
                expected = 6 * beta[4 + k]
                assert abs(jump - expected) <= 1e-6 * abs(expected)


def test_4_scale_invariance():
    with criterion(4, "raw vs rescaled predictor: identical fits to 1e-8, 50 instances"):
        rng = np.random.default_rng(4004)
        accepted = rejected = 0
        while accepted < 50:
            n = int(rng.integers(30, 61))
            K = int(rng.integers(2, 9))
            u = np.sort(rng.uniform(0.5, 2.0, n))
            y = np.sin(3 * u) + 0.1 * rng.normal(size=n)
            raw_knots = select_knots(u, y, K)
            # well-conditioned: the full raw candidate design has cond <= 1e6
            if np.linalg.cond(spline_columns(u, raw_knots.locations)) > 1e6:
                rejected += 1
                continue
            accepted += 1
            raw = best_subsets(u, y, raw_knots)
            s = make_scale(u)
            xs = s.forward(u)
            scaled = best_subsets(xs, y, select_knots(xs, y, K), scale=s)
            assert raw.winning_mask == scaled.winning_mask
            a, b = raw.winner, scaled.winner
            scale_y = np.abs(b.fitted).max()
            assert np.abs(a.fitted - b.fitted).max() <= 1e-8 * scale_y
            assert a.r2 == pytest.approx(b.r2, rel=1e-8)
            assert a.r2_adj == pytest.approx(b.r2_adj, rel=1e-8)
            assert raw.winner_bic == pytest.approx(scaled.winner_bic, rel=1e-8)
            np.testing.assert_allclose(scaled.knots_raw, raw.winning_knots.locations, rtol=1e-12)
        assert rejected < accepted


def test_5_selector_invariances():
    with criterion(5, "min/max knots unchanged under y+c and c*y, 100 instances"):
        rng = np.random.default_rng(5005)
        for _ in range(100):
            n = int(rng.integers(10, 80))
            K = int(rng.integers(1, min(n, 20) + 1))
            x = np.sort(rng.uniform(1e5, 1e7, n))
            y = rng.uniform(0, 0.01, n)
            base = select_knots(x, y, K)
            c = float(rng.uniform(-1, 1))
            scale = float(rng.uniform(0.01, 100))
            assert select_knots(x, y + c, K) == base
            assert select_knots(x, scale * y, K) == base


def _parse_report(path):
    lines = Path(path).read_text().splitlines()
    rows = list(csv.DictReader([l for l in lines if not l.startswith("#")]))
    return rows


def test_6_published_results(tmp_path, capsys):
    with criterion(6, "national fit: knot years and R2_adj; state count above 0.90"):
        usa = os.environ.get("KPART_USA_CSV")
        states = os.environ.get("KPART_STATES_DIR")
        if not usa and not states:
            pytest.skip("source data not supplied (set KPART_USA_CSV / KPART_STATES_DIR)")
        if usa:
            series, _ = load_series(usa)
            res = fit_kpart(series, 10)
            assert res.selected_years == USA_YEARS, res.selected_years
            assert abs(res.winner.r2_adj - USA_R2_ADJ) <= USA_R2_TOL, res.winner.r2_adj
            out = tmp_path / "usa.json"
            assert main(["fit", "-i", usa, "--k", "10", "-o", str(out)]) == 0
        if states:
            out = tmp_path / "report.csv"
            assert main(["report", "-i", states, "--k", "10", "-o", str(out)]) == 0
            rows = _parse_report(out)
            above = sum(1 for r in rows if r["r2_adj"] and float(r["r2_adj"]) > 0.90)
            assert abs(above - STATES_ABOVE_90) <= STATES_TOL, f"{above} above 0.90"


def test_7_performance(tmp_path):
    with criterion(7, "single n=55,K=10 fit < 1 s; 51-series report < 30 s"):
        rng = np.random.default_rng(7007)
        series = random_series(rng, n=55)
        start = time.perf_counter()
        res = fit_kpart(series, 10)
        single = time.perf_counter() - start
        assert len(res.bic_table) == 2 ** len(res.knots)
        assert single < 1.0, f"single fit took {single:.3f}s"

        d = tmp_path / "states"
        d.mkdir()
        for i in range(51):
            write_series(random_series(rng, n=55, name=f"S{i:02d}"), d / f"S{i:02d}.csv")
        start = time.perf_counter()
        assert main(["report", "-i", str(d), "--k", "10", "-o", str(tmp_path / "r.csv")]) == 0
        batch = time.perf_counter() - start
        assert len(_parse_report(tmp_path / "r.csv")) == 51
        assert batch < 30.0, f"batch report took {batch:.2f}s"
