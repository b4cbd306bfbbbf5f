"""Acceptance suite: one recorded pass/fail line per criterion.

Each test computes its criterion at the stated tolerance, records a summary
line (printed in a block at the end of the run), and asserts.  Two value
clauses are analytically unattainable at their stated tolerances; those are
marked strict-xfail with the measured floor in the reason, and everything
else in the same criterion is asserted in companion tests.

Oracle constants were frozen from independent computations (scipy.special
sine integrals, closed-form antiderivatives) before the tests were written.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import record
from expr_corpus import CORPUS
from karamata_kit import (
    GeometricGrid,
    QuadTolerance,
    apply_L,
    apply_L_points,
    classify_limit,
    differentiate,
    evaluate,
    format_expr,
    guct_diagnose,
    integral_asym_residual,
    integrate_log,
    interval_expand,
    invert_L,
    karamata_uct_check,
    mult_closure_residual,
    parse,
    rv_index,
    sv_test,
)
from karamata_kit.cli import main as cli_main

# frozen oracles
SI_1 = 0.9460830703671831
L_SIN_655360 = 0.04664494415840041
MEAN_LOG_BIAS_1E8 = 0.052221440142800016  # mean over lam in {2,10} of ln(ln(lam x)/ln x)/ln(lam)
VANISHING_FINAL_4E7 = 0.16639684959278048  # ln(1+ln x)/ln x at x = 10*4^11
BIG_QUAD = QuadTolerance(max_evals=50_000_000)


def test_criterion_01_constants_are_fixed_points():
    worst = 0.0
    for c in (-3.0, 0.0, 5.0):
        h = parse(repr(c))
        for x in (2.0, 10.0, 1e3, 1e6):
            worst = max(worst, abs(apply_L(h, x) - c))
    ok = worst <= 1e-12
    record(f"criterion 01 constant fixed point: {'PASS' if ok else 'FAIL'}"
           f" (max |L(c) - c| = {worst:.2e}, tol 1e-12)")
    assert ok


def test_criterion_02_quadrature_log_oracle():
    worst = 0.0
    for x in (10.0, 1e4, 1e8):
        got = integrate_log(parse("ln(x)"), x)
        want = math.log(x) ** 2 / 2.0
        assert got.converged
        worst = max(worst, abs(got.value - want) / want)
    ok = worst <= 1e-10
    record(f"criterion 02 quadrature oracle: {'PASS' if ok else 'FAIL'}"
           f" (max rel err = {worst:.2e}, tol 1e-10)")
    assert ok


def test_criterion_03_inverse_round_trip():
    worst = 0.0
    for f_text in ("ln(x)", "ln(x) + 3", "sqrt(ln(x))"):
        f = parse(f_text)
        g = invert_L(f)
        for x in (10.0, 100.0, 1e4):
            got = apply_L(g, x)
            want = evaluate(f, {"x": x})
            worst = max(worst, abs(got - want) / abs(want))
    symbolic_ok = invert_L(parse("ln(x)")) == parse("2.0 * ln(x)")
    ok = worst <= 1e-6 and symbolic_ok
    record(f"criterion 03 inverse round trip: {'PASS' if ok else 'FAIL'}"
           f" (max rel err = {worst:.2e}, tol 1e-6; symbolic 2 ln x"
           f" {'ok' if symbolic_ok else 'mismatch'})")
    assert ok


def test_criterion_04_companion_constant_limit():
    pts = apply_L_points(parse("4"), [10.0 * 10.0**k for k in range(8)])
    verdict = classify_limit(np.array([p.value for p in pts]), tol=1e-2)
    assert verdict.kind == "converges"
    assert abs(verdict.value - 4.0) <= 1e-2


def test_criterion_04_companion_vanishing_limit_kind():
    # L(1/(1+ln x)) = ln(1+ln x)/ln x along a ratio-4 grid up to 4.2e7:
    # the sequence classifies as converging even though its value is
    # still far from the limit 0 (see the xfail companion)
    grid = [10.0 * 4.0**k for k in range(12)]
    pts = apply_L_points(parse("1/(1+ln(x))"), grid)
    values = np.array([p.value for p in pts])
    analytic = np.array([math.log1p(math.log(x)) / math.log(x) for x in grid])
    np.testing.assert_allclose(values, analytic, rtol=1e-9)
    verdict = classify_limit(values, tol=1e-2)
    assert verdict.kind == "converges"


def test_criterion_04_companion_sine_oscillates_then_averages():
    h = parse("sin(x)")
    eval_grid = [10.0 * 2.0**k for k in range(20)]
    eval_verdict = classify_limit(np.array([math.sin(x) for x in eval_grid]))
    assert eval_verdict.kind == "oscillates"
    pts = apply_L_points(h, [10.0 * 4.0**k for k in range(9)], tol=BIG_QUAD)
    assert all(p.quad is None or p.quad.converged for p in pts)
    values = np.array([p.value for p in pts])
    verdict = classify_limit(values, tol=1e-2)
    assert verdict.kind == "converges"
    assert abs(values[-1] - L_SIN_655360) <= 1e-9
    assert abs(values[-1]) <= 0.05


@pytest.mark.xfail(
    strict=True,
    reason="analytically unattainable: L(1/(1+ln x)) = ln(1+ln x)/ln x decays"
    " like ln ln x / ln x and still sits at 0.161 at x = 1e8, far above the"
    " 1e-2 tolerance; no grid reaching only 1e8 can pass",
)
def test_criterion_04_limit_preservation_value_clause():
    grid = [10.0 * 4.0**k for k in range(12)]
    pts = apply_L_points(parse("1/(1+ln(x))"), grid)
    final = pts[-1].value
    assert abs(final - VANISHING_FINAL_4E7) <= 1e-9  # matches the analytic curve
    gap = abs(final - 0.0)
    record("criterion 04 limit preservation: FAIL (constant and sine clauses"
           f" pass; |L(1/(1+ln x)) - 0| = {gap:.4f} > 1e-2 at x = 4.2e7,"
           " analytic value 0.161 even at 1e8)")
    assert gap <= 1e-2


def test_criterion_05_companion_index_recovery_k0():
    worst_err = 0.0
    worst_spread = 0.0
    for rho in (0.0, 0.5, 2.0):
        est = rv_index(parse(f"x^{rho!r}"), lambdas=(2.0, 10.0))
        worst_err = max(worst_err, abs(est.rho_hat - rho))
        worst_spread = max(worst_spread, est.spread)
    assert worst_err <= 0.05
    assert worst_spread <= 0.05


@pytest.mark.xfail(
    strict=True,
    reason="analytically unattainable for k=1: the ln-factor bias of the"
    " log-ratio estimator is mean(ln(ln(lam x)/ln x)/ln lam) = 0.0522 at"
    " x = 1e8 for lam in {2,10}, just above the 0.05 tolerance",
)
def test_criterion_05_index_recovery_with_log_factor():
    worst = 0.0
    for rho in (0.0, 0.5, 2.0):
        est = rv_index(parse(f"x^{rho!r} * ln(x)"), lambdas=(2.0, 10.0))
        # the estimator lands exactly on rho + analytic bias, and the
        # spread clause itself holds comfortably
        assert abs(est.rho_hat - rho - MEAN_LOG_BIAS_1E8) <= 1e-9
        assert est.spread <= 0.05
        worst = max(worst, abs(est.rho_hat - rho))
    record("criterion 05 index recovery: FAIL (k=0 cases and all spreads"
           f" pass; k=1 bias |rho_hat - rho| = {worst:.4f} > 0.05 at x = 1e8,"
           " analytic estimator bias 0.0522 independent of rho)")
    assert worst <= 0.05


def test_criterion_06_counterexample_rejection():
    rep = sv_test(
        parse("x^(sin(x)/ln(x))"),
        lambdas=(math.pi,),
        grid=GeometricGrid(1000.0, 2.0, 33, integer_mode=True),
    )
    verdict_ok = rep.verdict == "not_slowly_varying"
    oscillation_ok = "oscillates" in rep.reason
    (only_pass,) = rep.passes
    track = next(t for t in only_pass.tracks if t.lam == math.pi)
    worst = max(
        abs(lr - (-math.sin(n))) for n, lr in zip(track.xs, track.log_ratios)
    )
    residuals_ok = worst <= 1e-6
    ok = verdict_ok and oscillation_ok and residuals_ok
    record(f"criterion 06 counterexample rejection: {'PASS' if ok else 'FAIL'}"
           f" (verdict {rep.verdict}, oscillation evidence"
           f" {'yes' if oscillation_ok else 'no'}, max |log ratio + sin n| ="
           f" {worst:.2e}, tol 1e-6)")
    assert ok


def test_criterion_07_karamata_uct_at_desk_scale():
    rep = karamata_uct_check(
        parse("ln(x)"), (1.0, 2.0), GeometricGrid(100.0, 100.0, 4), lambda_count=33
    )
    sups = list(rep.suprema)
    decreasing = all(a > b for a, b in zip(sups, sups[1:]))
    final_ok = sups[-1] <= 0.05
    # the exact supremum of |ln(lam x)/ln x - 1| on [1,2] is ln2/ln x,
    # 0.0376 at 1e8 (approximately 0.038)
    analytic = math.log(2.0) / math.log(1e8)
    match_ok = abs(sups[-1] - analytic) <= 1e-12
    ok = decreasing and final_ok and match_ok
    record(f"criterion 07 uniform ratio decay: {'PASS' if ok else 'FAIL'}"
           f" (suprema strictly decreasing: {decreasing}, final ="
           f" {sups[-1]:.4f} <= 0.05, analytic 0.0376)")
    assert ok


def test_criterion_08_generalized_uct():
    rep = guct_diagnose(
        parse("abs(ln(x+u) - ln(x))"),
        parse("1"),
        (0.0, 1.0),
        GeometricGrid(10.0, 10.0, 8),
        sample_count=1000,
    )
    hi_ok = rep.hi.ok and rep.hi.samples == 1000 and not rep.hi.violations
    sup_err = max(
        abs(s - math.log1p(1.0 / x)) for x, s in zip(rep.scan.xs, rep.scan.suprema)
    )
    sup_ok = sup_err <= 1e-9
    verdict_ok = rep.scan.verdict == "uniform"
    ok = hi_ok and sup_ok and verdict_ok
    record(f"criterion 08 generalized uniformity: {'PASS' if ok else 'FAIL'}"
           f" (inequality violations: {len(rep.hi.violations)}, sup vs"
           f" ln(1+1/x) max err = {sup_err:.2e}, scan {rep.scan.verdict})")
    assert ok


def test_criterion_09_integral_asymptotics():
    lam = math.e
    rep = integral_asym_residual(
        parse("1"), lam, GeometricGrid(math.exp(9.0), math.e, 8), bound=1.0
    )
    first = rep.rows[0].residual
    first_ok = abs(first - 0.1) <= 1e-9
    # residual should be proportional to 1/(1 + ln x / ln lam) exactly
    consts = [
        row.residual * (1.0 + math.log(row.x) / math.log(lam)) for row in rep.rows
    ]
    prop_err = max(abs(c - consts[0]) for c in consts)
    prop_ok = prop_err <= 1e-9
    ok = first_ok and prop_ok
    record(f"criterion 09 integral asymptotics: {'PASS' if ok else 'FAIL'}"
           f" (residual at e^9 = {first:.12f} vs 0.1, proportionality"
           f" spread = {prop_err:.2e}, tol 1e-9)")
    assert ok


def test_criterion_10_closure_identity_and_interval_arithmetic():
    rep = mult_closure_residual(
        parse("ln(ln(x))"), 2.0, 3.0, GeometricGrid(10.0, 10.0, 8)
    )
    ulps_ok = rep.identity_ok and rep.max_ulp_deviation <= 4.0
    exact_ok = all(
        interval_expand(2.0, 4.0, n) == (2.0**-n, 2.0**n) for n in range(1, 21)
    )
    ok = ulps_ok and exact_ok
    record(f"criterion 10 decomposition and expansion: {'PASS' if ok else 'FAIL'}"
           f" (max ulp deviation = {rep.max_ulp_deviation:g} <= 4, dyadic"
           f" expansion exact for n <= 20: {exact_ok})")
    assert ok


def test_criterion_11_parser_and_derivative():
    rng = np.random.default_rng(20260819)
    round_trip_failures = 0
    worst = 0.0
    for text, lo, hi in CORPUS:
        tree = parse(text)
        if parse(format_expr(tree)) != tree:
            round_trip_failures += 1
            continue
        deriv = differentiate(tree, "x")
        for x in rng.uniform(lo, hi, size=100):
            x = float(x)
            h = 1e-5 * max(1.0, abs(x))
            sym = evaluate(deriv, {"x": x})
            fd = (
                evaluate(tree, {"x": x + h}) - evaluate(tree, {"x": x - h})
            ) / (2.0 * h)
            worst = max(worst, abs(sym - fd) / max(1.0, abs(sym), abs(fd)))
    ok = round_trip_failures == 0 and worst <= 1e-6
    record(f"criterion 11 parser and derivative: {'PASS' if ok else 'FAIL'}"
           f" ({len(CORPUS)} expressions round trip, max derivative"
           f" deviation = {worst:.2e}, tol 1e-6)")
    assert ok


def test_criterion_12_determinism_across_thread_counts(capsys, monkeypatch):
    argv = ["uct", "scan", "--g", "x*u*exp(-x*u)", "--u-lo", "0.001"]
    payloads = []
    for threads in ("1", "8"):
        monkeypatch.setenv("KARAMATA_KIT_THREADS", threads)
        code = cli_main(argv)
        out = capsys.readouterr().out
        assert code == 0
        report = json.loads(out)
        report.pop("timing_ms")
        payloads.append(json.dumps(report, sort_keys=True))
    ok = payloads[0] == payloads[1]
    record(f"criterion 12 determinism: {'PASS' if ok else 'FAIL'}"
           f" (thread counts 1 and 8 produce byte-identical payloads"
           f" excluding timing: {ok})")
    assert ok
