import csv

import numpy as np
import pytest

from kpart.data import CrimeSeries, Observation


def make_series(name, years, population, rate=None, counts=None):
    obs = []
    for i, (yr, pop) in enumerate(zip(years, population)):
        if counts is not None:
            obs.append(Observation(int(yr), float(pop), crime_count=float(counts[i])))
        else:
            obs.append(Observation(int(yr), float(pop), rate=float(rate[i])))
    return CrimeSeries(name, tuple(obs))


def random_series(rng, n=55, noise=1e-4, name="synthetic"):
    """Growing population with a wavy rate, loosely shaped like the national data."""
    years = np.arange(1960, 1960 + n)
    population = 1.8e8 * np.exp(np.cumsum(rng.uniform(0.005, 0.015, n)))
    t = np.linspace(0, 1, n)
    rate = 0.004 + 0.002 * np.sin(2 * np.pi * t * rng.uniform(0.5, 1.5)) + rng.normal(0, noise, n)
    return make_series(name, years, population, rate=np.abs(rate))


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20170101)


def exact_spline_series(rng, n=40, K=5, name="exact", max_tries=500):
    """Series whose rate is exactly a cubic plus one truncated term.

    The true knot sits at an observation the min/max selector nominates, so
    the pipeline can represent the generating curve exactly. Returns the
    series and the 0-based source index of the true knot.
    """
    from kpart.knots import partition_indices, select_knots

    years = np.arange(1970, 1970 + n)
    pop = 1e6 * np.exp(np.cumsum(rng.uniform(0.005, 0.02, n)))
    s = (pop - pop.min()) / (pop.max() - pop.min())
    blocks, _ = partition_indices(n, K)
    ends = sorted({i for b in blocks for i in (b.start, b.stop - 1)} - {0, n - 1})
    for _ in range(max_tries):
        j = int(rng.choice(ends))
        if s[j] >= s[-3]:
            continue
        base = rng.normal(0, 1, 4)
        c = rng.choice([-1, 1]) * rng.uniform(5, 20)
        y = base[0] + base[1] * s + base[2] * s ** 2 + base[3] * s ** 3 + c * np.maximum(s - s[j], 0) ** 3
        y = 0.004 * (1 + (y - y.min()) / max(np.ptp(y), 1e-12))
        if j in select_knots(s, y, K).sources:
            return make_series(name, years, pop, rate=y), j
    raise RuntimeError("could not place a selectable knot")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda l: l.split("]")[1]):
            terminalreporter.write_line(line)
