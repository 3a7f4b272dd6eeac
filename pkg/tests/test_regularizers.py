import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sparselowrank.regularizers import (FAMILIES, LP_FLOOR, RegularizerSpec, auto_thresholds, eval_g, penalty,
                                        supergradient, weight_vector)

PW = RegularizerSpec.piecewise((0.1, 0.2), (5.0, 50.0, 60.0))

SPECS = [
    RegularizerSpec.nuclear(0.7),
    RegularizerSpec("lp", lam=1.3, p=0.5),
    RegularizerSpec("capped_l1", lam=2.0, theta=3.0),
    RegularizerSpec("etp", lam=1.5, theta=0.4),
    RegularizerSpec("scad", lam=2.0, theta=3.0),
    RegularizerSpec("mcp", lam=2.0, theta=3.0),
    PW,
    RegularizerSpec.piecewise((0.3, 0.5), (1.0, 4.0, 9.0), lam=2.5),
]


def branch_formula(spec, s):
    """Four-branch piecewise supergradient written out term by term, times lambda."""
    a1, a2, p1, p2, p3 = spec.a1, spec.a2, spec.p1, spec.p2, spec.p3
    if s <= p1:
        y = 2 - (2 - (a1 + a2)) / p1 * s
    elif s <= p2:
        y = a1 / (p1 - p2) * s + (a1 + a2) - p1 * a1 / (p1 - p2)
    elif s <= p3:
        y = a2 / (p2 - p3) * s + a2 - p2 * a2 / (p2 - p3)
    else:
        y = 0.0
    return spec.lam * y


def table_supergradient(spec, s):
    """Scalar supergradients of the classic surrogates, one branch per line."""
    lam, th = spec.lam, spec.theta
    if spec.family == "nuclear":
        return lam
    if spec.family == "lp":
        return lam * spec.p * max(s, LP_FLOOR) ** (spec.p - 1)
    if spec.family == "capped_l1":
        return lam if s < th else 0.0
    if spec.family == "etp":
        return lam * th / (1 - math.exp(-th)) * math.exp(-th * s)
    if spec.family == "scad":
        if s <= lam:
            return lam
        return (th * lam - s) / (th - 1) if s <= th * lam else 0.0
    if spec.family == "mcp":
        return lam - s / th if s < th * lam else 0.0
    return branch_formula(spec, s)


def table_value(spec, s):
    lam, th = spec.lam, spec.theta
    if spec.family == "nuclear":
        return lam * s
    if spec.family == "lp":
        return lam * s**spec.p
    if spec.family == "capped_l1":
        return lam * s if s < th else lam * th
    if spec.family == "etp":
        return lam / (1 - math.exp(-th)) * (1 - math.exp(-th * s))
    if spec.family == "scad":
        if s <= lam:
            return lam * s
        if s <= th * lam:
            return (-(s**2) + 2 * th * lam * s - lam**2) / (2 * (th - 1))
        return lam**2 * (th + 1) / 2
    if spec.family == "mcp":
        return lam * s - s**2 / (2 * th) if s < th * lam else th * lam**2 / 2
    raise AssertionError("no closed form for piecewise")


def test_scad_and_mcp_examples():
    assert supergradient(RegularizerSpec("scad", lam=2, theta=3), 1.0) == 2.0
    assert supergradient(RegularizerSpec("mcp", lam=2, theta=3), 10.0) == 0.0


@pytest.mark.parametrize("sigma, expected", [(0.0, 2.0), (5.0, 0.3), (100.0, 0.0)])
def test_piecewise_examples(sigma, expected):
    assert supergradient(PW, sigma) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_supergradient_matches_closed_forms(spec):
    for s in np.linspace(0, 80, 1601):
        assert supergradient(spec, s) == pytest.approx(table_supergradient(spec, s), rel=1e-12, abs=1e-12)


def test_capped_l1_boundary_selects_zero():
    assert supergradient(RegularizerSpec("capped_l1", lam=2.0, theta=3.0), 3.0) == 0.0


def test_lp_floor_keeps_value_finite():
    spec = RegularizerSpec("lp", p=0.5)
    assert supergradient(spec, 0.0) == pytest.approx(0.5 * LP_FLOOR**-0.5)


@pytest.mark.parametrize("spec", [s for s in SPECS if s.family != "piecewise"], ids=lambda s: s.family)
def test_eval_g_matches_table(spec):
    for s in np.linspace(0, 20, 401):
        assert eval_g(spec, s) == pytest.approx(table_value(spec, s), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_eval_g_is_integral_of_supergradient(spec):
    knots = [spec.p1, spec.p2, spec.p3] if spec.family == "piecewise" else None
    for s in (0.3, 1.0, 2.7, 5.0, 12.0, 49.0, 55.5, 75.0):
        if spec.family == "lp":
            ref = spec.lam * s**spec.p  # integrand singular at 0; floor only matters below 1e-8
        else:
            ref, _ = quad(lambda t: supergradient(spec, t), 0, s, points=[p for p in (knots or []) if p < s] or None,
                          limit=200, epsabs=1e-12, epsrel=1e-12)
        assert eval_g(spec, s) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_eval_g_examples():
    for spec in SPECS:
        assert eval_g(spec, 0.0) == 0.0
    assert eval_g(RegularizerSpec("lp", p=0.5), 4.0) == pytest.approx(2.0)
    assert eval_g(PW, 5.0) == pytest.approx(5.75)


def test_negative_sigma_is_rejected():
    for fn in (supergradient, eval_g):
        with pytest.raises(ValueError):
            fn(PW, -1.0)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
@settings(max_examples=60, deadline=None)
@given(a=st.floats(0, 200), b=st.floats(0, 200))
def test_supergradient_monotone_and_bounded(spec, a, b):
    lo, hi = min(a, b), max(a, b)
    g_lo, g_hi = supergradient(spec, lo), supergradient(spec, hi)
    assert g_lo >= g_hi - 1e-12
    assert 0 <= g_hi <= supergradient(spec, 0.0) < math.inf
    assert eval_g(spec, hi) >= eval_g(spec, lo) - 1e-12


def test_piecewise_continuity_at_knots():
    for p, val in ((5.0, 0.3), (50.0, 0.2), (60.0, 0.0)):
        for eps in (1e-3, 1e-6, 1e-9):
            assert abs(supergradient(PW, p - eps) - supergradient(PW, p + eps)) < 10 * eps
        assert supergradient(PW, p) == pytest.approx(val, abs=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_numerical_derivative_matches(spec):
    h = 1e-6
    for s in (0.37, 1.9, 7.3, 23.1, 52.4, 70.2):
        kinks = {spec.theta, (spec.theta or 0) * spec.lam, spec.lam, spec.p1, spec.p2, spec.p3}
        if any(k is not None and abs(s - k) < 1e-3 for k in kinks):
            continue
        fd = (eval_g(spec, s + h) - eval_g(spec, s - h)) / (2 * h)
        assert fd == pytest.approx(supergradient(spec, s), abs=1e-5)


def test_weight_vector_examples():
    sig = np.array([9.0, 4.0, 1.0])
    np.testing.assert_allclose(weight_vector(RegularizerSpec.nuclear(0.3), sig), [0.3] * 3)
    np.testing.assert_allclose(weight_vector(PW, [100.0, 5.0, 0.0]), [0.0, 0.3, 2.0], atol=1e-14)
    np.testing.assert_allclose(weight_vector(RegularizerSpec("mcp", lam=2, theta=3), [10.0, 3.0, 0.0]), [0, 1, 2])
    with pytest.raises(ValueError):
        weight_vector(PW, [1.0, 2.0])


@given(st.lists(st.floats(0, 100), min_size=1, max_size=30))
def test_weight_vector_nondecreasing(values):
    sig = np.sort(values)[::-1]
    for spec in SPECS:
        assert np.all(np.diff(weight_vector(spec, sig)) >= -1e-12)


def test_penalty_sums_values():
    sig = np.array([70.0, 20.0, 3.0, 0.0])
    assert penalty(PW, sig) == pytest.approx(sum(eval_g(PW, s) for s in sig))


def test_auto_thresholds():
    assert auto_thresholds(np.arange(1, 101)) == (95.0, 98.0, 99.0)
    with pytest.raises(ValueError):
        auto_thresholds(np.full(200, 3.0))
    with pytest.raises(ValueError):
        auto_thresholds([5.0])
    with pytest.raises(ValueError):
        auto_thresholds(np.zeros(150))
    ties = np.concatenate([np.ones(90), np.full(10, 7.0)])
    p1, p2, p3 = auto_thresholds(ties)
    assert p1 < p2 < p3 and p3 - p1 < 1e-7


def test_spec_validation():
    bad = [dict(family="lp", p=1.5), dict(family="scad", theta=2.0), dict(family="mcp", theta=-1.0),
           dict(family="etp"), dict(family="nuclear", lam=0.0), dict(family="piecewise", p1=5, p2=5, p3=6),
           dict(family="piecewise", a1=1.5, a2=0.6), dict(family="bogus")]
    for kwargs in bad:
        with pytest.raises(ValueError):
            RegularizerSpec(**kwargs)
    assert set(FAMILIES) >= {"nuclear", "piecewise"}


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_text_round_trip(spec):
    assert RegularizerSpec.from_text(spec.to_text()) == spec


def test_from_text_accepts_comments_and_lambda():
    spec = RegularizerSpec.from_text("# surrogate\nfamily = scad\nlambda=2\ntheta=3.7\n")
    assert spec == RegularizerSpec("scad", lam=2.0, theta=3.7)
    with pytest.raises(ValueError):
        RegularizerSpec.from_text("family=scad\nwhat=1\n")
