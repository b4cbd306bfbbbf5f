"""Index estimation, slow-variation testing, profiles, class preservation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from karamata_kit import (
    ClaimedClass,
    GeometricGrid,
    PreconditionError,
    class_preservation_check,
    classify_limit,
    exponent_profile,
    parse,
    rv_index,
    sv_test,
)
from karamata_kit.asymptotics import DEEP_GRID, DEFAULT_INTEGER_GRID


# ---------------------------------------------------------------------------
# grids

def test_grid_points_are_geometric():
    g = GeometricGrid(10.0, 10.0, 4)
    assert g.points() == [10.0, 100.0, 1000.0, 10000.0]


def test_integer_grid_walks_consecutive_integers():
    g = GeometricGrid(1000.0, 2.0, 5, integer_mode=True)
    assert g.points() == [1000.0, 1001.0, 1002.0, 1003.0, 1004.0]


def test_grid_validation():
    with pytest.raises(PreconditionError):
        GeometricGrid(1.0, 10.0, 8)
    with pytest.raises(PreconditionError):
        GeometricGrid(10.0, 1.0, 8)
    with pytest.raises(PreconditionError):
        GeometricGrid(10.0, 10.0, 0)
    # integer mode does not constrain the ratio
    GeometricGrid(10.0, 1.0, 8, integer_mode=True)


# ---------------------------------------------------------------------------
# sequence classification

def test_classify_needs_eight_samples():
    with pytest.raises(PreconditionError):
        classify_limit(np.ones(7))


def test_classify_constant_sequence():
    v = classify_limit(np.full(12, 3.25))
    assert v.kind == "converges"
    assert v.value == 3.25


def test_classify_geometric_decay():
    v = classify_limit(2.0 + 0.5 ** np.arange(12))
    assert v.kind == "converges"
    assert v.value == pytest.approx(2.0, abs=1e-3)


def test_classify_alternating_sequence():
    v = classify_limit(np.where(np.arange(16) % 2 == 0, 0.5, -0.5))
    assert v.kind == "oscillates"


def test_classify_divergence():
    v = classify_limit(10.0 ** np.arange(8, 18))
    assert v.kind == "diverges"
    assert v.sign == 1


def test_classify_divergence_negative():
    v = classify_limit(-(10.0 ** np.arange(8, 18)))
    assert v.sign == -1


def test_classify_non_finite_is_inconclusive():
    vals = np.ones(10)
    vals[4] = np.nan
    assert classify_limit(vals).kind == "inconclusive"


def test_classify_tiny_noise_is_convergence():
    vals = 1.0 + 1e-13 * np.where(np.arange(16) % 2 == 0, 1.0, -1.0)
    v = classify_limit(vals)
    assert v.kind == "converges"
    assert v.value == pytest.approx(1.0, abs=1e-12)


def test_classify_rejects_bad_tolerance():
    with pytest.raises(PreconditionError):
        classify_limit(np.ones(10), tol=0.0)


# ---------------------------------------------------------------------------
# variation index

def test_pure_power_index_is_exact():
    est = rv_index(parse("x^2"))
    assert est.verdict == "regularly_varying"
    assert est.rho_hat == pytest.approx(2.0, abs=1e-12)
    assert est.spread <= 1e-12


def test_negative_power_index():
    est = rv_index(parse("x^(-0.5)"))
    assert est.verdict == "regularly_varying"
    assert est.rho_hat == pytest.approx(-0.5, abs=1e-12)


def test_slowly_varying_factor_shifts_nothing():
    est = rv_index(parse("x^2 * ln(x)"), grid=DEEP_GRID)
    assert est.verdict == "regularly_varying"
    assert est.rho_hat == pytest.approx(2.0, abs=0.05)


def test_oscillating_function_is_not_rv():
    est = rv_index(parse("exp(sin(x))"))
    assert est.verdict == "not_regularly_varying"
    assert est.witness_lambda is not None


def test_rv_rejects_bad_lambdas():
    with pytest.raises(PreconditionError):
        rv_index(parse("x"), lambdas=(1.0,))
    with pytest.raises(PreconditionError):
        rv_index(parse("x"), lambdas=(-2.0,))
    with pytest.raises(PreconditionError):
        rv_index(parse("x"), lambdas=())


def test_rv_requires_positive_function():
    with pytest.raises(PreconditionError) as exc:
        rv_index(parse("10 - x"))
    assert "positive" in str(exc.value)


@given(st.floats(0.01, 100.0))
@settings(max_examples=30, deadline=None)
def test_index_ignores_constant_scaling(c):
    base = rv_index(parse("x^1.5"))
    scaled = rv_index(parse(f"{c!r} * x^1.5"))
    assert scaled.verdict == base.verdict
    assert abs(scaled.rho_hat - base.rho_hat) <= 1e-12


@given(st.floats(-1.5, 2.0), st.floats(-1.5, 2.0))
@settings(max_examples=30, deadline=None)
def test_index_of_products_adds(a, b):
    est = rv_index(parse(f"x^{a!r} * x^{b!r}"))
    assert est.rho_hat == pytest.approx(a + b, abs=1e-9)
    assert est.spread <= 2 * 1e-9 + 1e-12


# ---------------------------------------------------------------------------
# slow variation

@pytest.mark.parametrize("text", ["ln(x)", "7", "ln(ln(x))", "ln(x)^2"])
def test_slowly_varying_examples(text):
    rep = sv_test(parse(text))
    assert rep.verdict == "slowly_varying", rep.reason


def test_small_power_is_not_slowly_varying():
    rep = sv_test(parse("x^0.1"))
    assert rep.verdict == "not_slowly_varying"
    assert rep.witness_lambda == 2.0
    assert rep.implied_index == pytest.approx(0.1, abs=1e-9)


def test_counterexample_oscillates_at_pi():
    rep = sv_test(parse("x^(sin(x)/ln(x))"), lambdas=())
    assert rep.verdict == "not_slowly_varying"
    assert rep.witness_lambda == math.pi
    assert "oscillates" in rep.reason


def test_counterexample_integer_grid_log_ratios_track_minus_sin():
    rep = sv_test(parse("x^(sin(x)/ln(x))"), lambdas=(math.pi,),
                  grid=DEFAULT_INTEGER_GRID)
    assert rep.verdict == "not_slowly_varying"
    (only_pass,) = rep.passes
    track = next(t for t in only_pass.tracks if t.lam == math.pi)
    for n, lr in zip(track.xs, track.log_ratios):
        assert lr == pytest.approx(-math.sin(n), abs=1e-6)


def test_sv_always_includes_an_integer_pass():
    rep = sv_test(parse("ln(x)"))
    modes = [p.integer_mode for p in rep.passes]
    assert modes == [False, True]


def test_sv_implies_flat_exponent_profile():
    # structural link: a slowly varying verdict must come with a profile
    # that converges to 0 on the same default grid
    for text in ("ln(x)", "7", "ln(ln(x))"):
        if sv_test(parse(text)).verdict == "slowly_varying":
            prof = exponent_profile(parse(text))
            assert prof.verdict.kind == "converges"
            assert abs(prof.verdict.value) <= 0.05


# ---------------------------------------------------------------------------
# exponent profile

def test_profile_of_pure_power_is_exact():
    prof = exponent_profile(parse("x^3"))
    assert prof.verdict.kind == "converges"
    assert prof.verdict.value == pytest.approx(3.0, abs=1e-12)
    assert all(v == pytest.approx(3.0, abs=1e-12) for v in prof.xi_values)


def test_profile_of_ln_converges_to_zero():
    prof = exponent_profile(parse("ln(x)"))
    assert prof.verdict.kind == "converges"
    assert abs(prof.verdict.value) <= 0.05


def test_profile_requires_positive_function():
    with pytest.raises(PreconditionError):
        exponent_profile(parse("-ln(x)"))


# ---------------------------------------------------------------------------
# class preservation under the operator

def test_vanishing_class_is_preserved():
    rep = class_preservation_check(parse("1/(1+ln(x))"), ClaimedClass("z0"))
    assert rep.hypothesis_holds
    assert rep.conclusion_holds
    assert rep.asserted


def test_slow_variation_is_preserved():
    rep = class_preservation_check(parse("ln(x)"), ClaimedClass("r0"))
    assert rep.hypothesis_holds
    assert rep.conclusion_holds


def test_positive_index_is_preserved():
    rep = class_preservation_check(parse("x"), ClaimedClass("r_alpha", alpha=1.0))
    assert rep.hypothesis_holds
    assert rep.conclusion_holds
    assert rep.asserted


def test_bounded_band_is_preserved():
    rep = class_preservation_check(
        parse("2 + sin(ln(x))"),
        ClaimedClass("bounded", bounds=(1.0, 3.0)),
        grid=GeometricGrid(10.0, 10.0, 8),
    )
    assert rep.hypothesis_holds
    assert rep.conclusion_holds


def test_negative_index_is_recorded_not_asserted():
    # the operator sends decaying powers to slowly varying functions, so
    # the claimed negative index cannot survive; the report must say it
    # measured a mismatch without asserting the inherited class
    rep = class_preservation_check(parse("1/x"), ClaimedClass("r_alpha", alpha=-1.0))
    assert not rep.asserted
    assert not rep.conclusion_holds
    assert rep.conclusion_detail["measured_index"] == pytest.approx(0.0, abs=0.05)


def test_failed_hypothesis_is_reported():
    rep = class_preservation_check(parse("ln(x)"), ClaimedClass("z0"))
    assert not rep.hypothesis_holds
    assert not rep.conclusion_holds


def test_claimed_class_validation():
    with pytest.raises(PreconditionError):
        ClaimedClass("nope")
    with pytest.raises(PreconditionError):
        ClaimedClass("r_alpha")
    with pytest.raises(PreconditionError):
        ClaimedClass("bounded", bounds=(2.0, 1.0))
