import math
import warnings

import numpy as np
import pytest

from cgfactorial import (
    INDEPENDENCE,
    CensoredRecord,
    DataValidationError,
    GroupedSample,
    InsufficientSampleError,
    NonArchimedeanError,
    TauValidityError,
    TiesWarning,
    at_risk,
    cg_survival,
    group_sample,
    km_survival,
    make_copula,
    sample_from_pairs,
)
from helpers import km_by_hand, random_group

FAMILIES = [
    make_copula("clayton", 0.5),
    make_copula("clayton", 2.0),
    make_copula("clayton", 8.0),
    make_copula("gumbel", 0.5),
    make_copula("gumbel", 3.0),
    make_copula("frank", -3.0),
    make_copula("frank", 5.0),
]


def closed_form(family, theta, time, status):
    """Direct per-record evaluation of the family-specific CG formulas."""
    n = len(time)
    total, out = 0.0, []
    for k, (t, d) in enumerate(zip(time, status)):
        y = n - k
        a, b = (y - 1) / n, y / n
        if d:
            if family == "clayton":
                total += (a ** -theta if a > 0 else math.inf) - b ** -theta
            elif family == "gumbel":
                total += (-math.log(a) if a > 0 else math.inf) ** (theta + 1) - (-math.log(b)) ** (theta + 1)
            else:
                ea = math.log((math.exp(-theta * a) - 1) / (math.exp(-theta) - 1)) if a > 0 else -math.inf
                total += -ea + math.log((math.exp(-theta * b) - 1) / (math.exp(-theta) - 1))
        if family == "clayton":
            s = (1 + total) ** (-1 / theta) if math.isfinite(total) else 0.0
        elif family == "gumbel":
            s = math.exp(-(total ** (1 / (theta + 1)))) if math.isfinite(total) else 0.0
        else:
            s = -math.log1p((math.exp(-theta) - 1) * math.exp(-total)) / theta
        out.append(s)
    return np.array(out)


def test_group_sample_sorts():
    g = group_sample([(2, 1), (1, 0)])
    assert g.records == [CensoredRecord(1.0, 0), CensoredRecord(2.0, 1)]
    assert g.n_ties == 0


def test_group_sample_ties_warn():
    with pytest.warns(TiesWarning):
        g = group_sample([(1, 1), (1, 0)])
    assert g.n_ties == 1
    assert list(g.status) == [1, 0]


@pytest.mark.parametrize("bad", [[], [(0.0, 1)], [(-1.0, 0)], [(1.0, 2)]])
def test_group_sample_rejects(bad):
    with pytest.raises(DataValidationError):
        group_sample(bad)


def test_at_risk():
    g = sample_from_pairs([(1, 1), (2, 1), (3, 1)])
    assert at_risk(g, 2) == 2
    assert at_risk(g, 0.5) == 3
    assert at_risk(g, 3.5) == 0


def test_samples_are_read_only():
    g = sample_from_pairs([(1, 1), (2, 1), (3, 1)])
    with pytest.raises(ValueError):
        g.time[0] = 5.0


def test_cg_independence_hand_example():
    s = cg_survival(sample_from_pairs([(1, 1), (2, 0), (3, 1)]), INDEPENDENCE)
    assert s.eval(0.5) == 1.0
    assert s.eval([1, 2.5]) == pytest.approx([2 / 3, 2 / 3])
    assert s.eval(3) == pytest.approx(0.0, abs=1e-15)


def test_cg_clayton_hand_example():
    g = sample_from_pairs([(1, 1), (2, 0), (3, 1), (4, 1)])
    s = cg_survival(g, make_copula("clayton", 2.0))
    # increments 7/18 then 6: levels (16/9)^-1/2 and (1 + 2 * 115/18)^-1/2
    assert s.eval([0.5, 1, 2.9, 3, 3.5]) == pytest.approx([1, 0.75, 0.75, 13.7778 ** -0.5, 13.7778 ** -0.5], abs=1e-4)
    assert s.eval(3) == pytest.approx(0.2694, abs=1e-4)
    assert s.eval(4) == 0.0
    km = cg_survival(g, INDEPENDENCE)
    assert km.eval([1, 3, 4]) == pytest.approx([0.75, 0.375, 0.0])
    assert abs(km.eval(3) - s.eval(3)) > 0.1


def test_km_examples():
    s = km_survival(sample_from_pairs([(1, 1), (2, 1), (3, 1)]))
    assert s.eval([1, 2, 3]) == pytest.approx([2 / 3, 1 / 3, 0])
    flat = km_survival(sample_from_pairs([(1, 0), (2, 0)]))
    assert flat.jump_times.size == 0
    assert flat.eval([0, 1, 2]) == pytest.approx([1, 1, 1])
    s = km_survival(sample_from_pairs([(1, 1), (2, 0), (3, 1)]))
    assert s.eval([1, 2, 3]) == pytest.approx([2 / 3, 2 / 3, 0])


def test_eval_left_and_midpoint():
    s = km_survival(sample_from_pairs([(1, 1), (2, 0), (3, 1)]))
    assert s.eval(1) == pytest.approx(2 / 3)
    assert s.eval_pm(1) == pytest.approx(5 / 6)
    assert s.eval_left(1) == 1.0
    assert s.eval(1.5) == s.eval_pm(1.5) == pytest.approx(2 / 3)
    assert s.eval(0) == s.eval_pm(0) == 1.0


def test_beyond_domain():
    s = cg_survival(sample_from_pairs([(1, 1), (2, 1), (3, 0)]), INDEPENDENCE)
    with pytest.raises(TauValidityError):
        s.eval(3.5)
    with pytest.raises(TauValidityError):
        s.eval(-1)
    # a curve that has reached zero is zero from then on
    z = cg_survival(sample_from_pairs([(1, 1), (2, 1)]), INDEPENDENCE)
    assert z.eval(10.0) == 0.0


def test_fgm_rejected():
    with pytest.raises(NonArchimedeanError):
        cg_survival(sample_from_pairs([(1, 1), (2, 1)]), make_copula("fgm", 0.5))


def test_single_subject_rejected():
    with pytest.raises(InsufficientSampleError):
        cg_survival(sample_from_pairs([(1, 1)]), INDEPENDENCE)


def test_cg_independence_equals_km(rng):
    for _ in range(200):
        g = random_group(rng, integer_times=bool(rng.integers(2)))
        cg = cg_survival(g, INDEPENDENCE)
        km = km_survival(g)
        assert np.array_equal(cg.jump_times, km.jump_times)
        np.testing.assert_allclose(cg.values, km.values, rtol=0, atol=1e-12)
        t_ref, s_ref = km_by_hand(g.time, g.status)
        np.testing.assert_allclose(km.values, s_ref, atol=1e-12)


@pytest.mark.parametrize("c", FAMILIES, ids=str)
def test_no_censoring_gives_empirical(c, rng):
    for _ in range(20):
        n = int(rng.integers(2, 40))
        t = np.sort(rng.exponential(size=n))
        s = cg_survival(GroupedSample.from_arrays(t, np.ones(n, int)), c)
        np.testing.assert_allclose(s.values, 1 - np.arange(1, n + 1) / n, atol=1e-10)


@pytest.mark.parametrize("c", FAMILIES, ids=str)
def test_generic_path_matches_closed_forms(c, rng):
    for _ in range(20):
        g = random_group(rng)
        s = cg_survival(g, c)
        ref = closed_form(c.family.value, c.theta, g.time, g.status)
        np.testing.assert_allclose(s.eval(g.time), ref, atol=1e-10)


@pytest.mark.parametrize("c", FAMILIES + [INDEPENDENCE], ids=str)
def test_curve_shape(c, rng):
    for _ in range(20):
        g = random_group(rng)
        s = cg_survival(g, c)
        assert np.all((s.values >= 0) & (s.values <= 1))
        assert np.all(np.diff(np.r_[1.0, s.values]) <= 0)
        assert np.array_equal(s.jump_times, np.unique(g.time[g.status == 1]))
        times, levels = s.knots()
        assert (times[0], levels[0]) == (0.0, 1.0)
        assert times.size == s.jump_times.size + 1


def test_clayton_monotone_in_theta():
    fixtures = [
        [(0.2, 1), (0.5, 0), (0.7, 1), (0.9, 0), (1.1, 1), (1.4, 1), (1.8, 0), (2.0, 1)],
        [(1, 1), (2, 0), (3, 1), (4, 0), (5, 0), (6, 1), (7, 1)],
    ]
    thetas = [0.0, 0.5, 1, 2, 4, 8]
    for pairs in fixtures:
        g = sample_from_pairs(pairs)
        first_cens = min(t for t, d in pairs if d == 0)
        grid = np.linspace(first_cens, max(t for t, _ in pairs), 50)
        curves = np.array([cg_survival(g, make_copula("clayton", th)).eval(grid) for th in thetas])
        assert np.all(np.diff(curves, axis=0) <= 1e-12)


def test_ties_processed_event_first():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiesWarning)
        g = GroupedSample.from_arrays([2, 1, 2, 2, 3], [0, 1, 1, 1, 1])
    assert list(g.status) == [1, 1, 1, 0, 1]
    s = cg_survival(g, INDEPENDENCE)
    # KM with 2 deaths among 4 at risk at t=2
    assert s.eval(2) == pytest.approx(0.8 * 0.5)


def test_large_theta_overflow_is_reported():
    g = sample_from_pairs([(t, 1) for t in range(1, 401)])
    with pytest.raises(Exception, match="overflow|theta"):
        cg_survival(g, make_copula("clayton", 500.0))
