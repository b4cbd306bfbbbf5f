"""Uniform-convergence scans and residual diagnostics.

The scanners share one shape: evaluate a residual over an (x, parameter)
grid, take per-x suprema (grid maximum plus one local refinement pass
around the argmax, since interior peaks can fall between grid points), and
classify the supremum sequence.  A Uniform verdict is grid-relative; a
NotUniform verdict exhibits a witness: the tail of the supremum sequence
stays above a positive floor while no longer decreasing.

Also here: the triangle-style inequality check on low-discrepancy samples,
the multiplicative-closure decomposition identity, the interval expansion
map, and the integral-asymptotics residual table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    GeometricGrid,
    LimitVerdict,
    MIN_SAMPLES,
    RATIO_CLASSIFY_TOL,
    VALUE_TOL,
    classify_limit,
)
from .exprlang import Bin, EvalError, Expr, eval_array
from .quad import IntegralCache, PreconditionError, QuadTolerance

__all__ = [
    "ScanReport",
    "Region",
    "HiViolation",
    "HiReport",
    "GuctReport",
    "MultClosureReport",
    "AsymRow",
    "AsymReport",
    "uct_scan",
    "karamata_uct_check",
    "hi_check",
    "guct_diagnose",
    "condition_scan_310",
    "mult_closure_residual",
    "interval_expand",
    "integral_asym_residual",
    "halton_points",
]

MIN_PARAM_COUNT = 9
REFINE_COUNT = 33


@dataclass(frozen=True)
class ScanReport:
    xs: tuple[float, ...]
    params: tuple[float, ...]
    residuals: tuple[tuple[float, ...], ...]  # one row per x, signed values
    suprema: tuple[float, ...]  # per-x max |residual|, after refinement
    sup_params: tuple[float, ...]  # parameter attaining each supremum
    verdict: str  # uniform | not_uniform | inconclusive
    witness_param: float | None
    floor: float | None
    suprema_verdict: LimitVerdict | None
    column_verdicts: tuple[LimitVerdict, ...] | None  # per base param
    note: str = ""


def _refined_supremum(row_fn, params: np.ndarray, base_row: np.ndarray):
    """Grid max of |base_row| improved by one refinement pass at the argmax."""
    j = int(np.argmax(np.abs(base_row)))
    lo = params[max(j - 1, 0)]
    hi = params[min(j + 1, params.size - 1)]
    sup = float(np.abs(base_row[j]))
    arg = float(params[j])
    if hi > lo:
        fine = np.linspace(lo, hi, REFINE_COUNT)
        fine_row = np.abs(row_fn(fine))
        k = int(np.argmax(fine_row))
        if float(fine_row[k]) > sup:
            sup = float(fine_row[k])
            arg = float(fine[k])
    return sup, arg


def _scan(
    row_fn,
    xs: np.ndarray,
    params: np.ndarray,
    classify_tol: float,
    value_tol: float,
    map_rows=None,
) -> ScanReport:
    """Shared scan driver.  ``row_fn(x, params) -> signed residual row``."""
    mapper = map_rows if map_rows is not None else (lambda fn, items: [fn(i) for i in items])

    def one_row(x: float):
        try:
            row = np.asarray(row_fn(x, params), dtype=float)
            sup, arg = _refined_supremum(lambda p: row_fn(x, p), params, row)
        except EvalError as exc:
            raise type(exc)(f"{exc} (scan row x = {x!r})") from exc
        return row, sup, arg

    computed = mapper(one_row, [float(x) for x in xs])
    rows = np.vstack([c[0] for c in computed])
    suprema = np.array([c[1] for c in computed])
    sup_params = np.array([c[2] for c in computed])

    column_verdicts = None
    if xs.size >= MIN_SAMPLES:
        column_verdicts = tuple(
            classify_limit(rows[:, j], classify_tol) for j in range(params.size)
        )

    if xs.size < MIN_SAMPLES:
        verdict, witness, floor, sup_verdict = (
            "inconclusive",
            None,
            None,
            None,
        )
        note = f"fewer than {MIN_SAMPLES} x samples; suprema not classified"
    else:
        sup_verdict = classify_limit(suprema, classify_tol)
        tail = suprema[suprema.size // 2 :]
        floor = float(np.min(tail))
        still_decreasing = bool(
            np.all(np.diff(tail) < 0) and tail[-1] <= 0.9 * tail[0]
        )
        if sup_verdict.converges and abs(sup_verdict.value) <= value_tol:
            verdict, witness, note = "uniform", None, "suprema settle within tolerance"
        elif floor > value_tol and not still_decreasing:
            verdict = "not_uniform"
            witness = float(sup_params[-1])
            note = f"suprema stay >= {floor:.6g} without decreasing"
        else:
            verdict, witness = "inconclusive", None
            note = "suprema neither settled below tolerance nor stabilized above it"

    return ScanReport(
        xs=tuple(float(x) for x in xs),
        params=tuple(float(p) for p in params),
        residuals=tuple(tuple(float(v) for v in row) for row in rows),
        suprema=tuple(float(s) for s in suprema),
        sup_params=tuple(float(p) for p in sup_params),
        verdict=verdict,
        witness_param=witness,
        floor=floor,
        suprema_verdict=sup_verdict,
        column_verdicts=column_verdicts,
        note=note,
    )


def _check_interval(interval, what: str) -> tuple[float, float]:
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise PreconditionError(f"{what} needs a < b, got [{a!r}, {b!r}]")
    return a, b


def uct_scan(
    G: Expr,
    u_interval,
    x_grid: GeometricGrid,
    u_count: int = REFINE_COUNT,
    classify_tol: float = RATIO_CLASSIFY_TOL,
    value_tol: float = VALUE_TOL,
    map_rows=None,
) -> ScanReport:
    """Scan ``|G(x, u)|`` for uniform smallness in u as x grows."""
    a, b = _check_interval(u_interval, "u interval")
    if u_count < MIN_PARAM_COUNT:
        raise PreconditionError(f"u_count must be >= {MIN_PARAM_COUNT}")
    xs = np.asarray(x_grid.points())
    params = np.linspace(a, b, u_count)

    def row_fn(x: float, ps: np.ndarray) -> np.ndarray:
        return np.abs(eval_array(G, {"x": x, "u": ps}))

    return _scan(row_fn, xs, params, classify_tol, value_tol, map_rows)


def karamata_uct_check(
    F: Expr,
    lambda_interval,
    x_grid: GeometricGrid,
    lambda_count: int = REFINE_COUNT,
    classify_tol: float = RATIO_CLASSIFY_TOL,
    value_tol: float = VALUE_TOL,
    var: str = "x",
    map_rows=None,
) -> ScanReport:
    """Scan the slow-variation residual ``F(lam x)/F(x) - 1`` over a compact
    lambda window.  Uniform decay of the suprema is the numerical face of
    the uniform convergence property for slowly varying F."""
    a, b = _check_interval(lambda_interval, "lambda interval")
    if a <= 0:
        raise PreconditionError("lambda interval must sit in (0, inf)")
    if lambda_count < MIN_PARAM_COUNT:
        raise PreconditionError(f"lambda_count must be >= {MIN_PARAM_COUNT}")
    xs = np.asarray(x_grid.points())
    params = np.linspace(a, b, lambda_count)

    def row_fn(x: float, ps: np.ndarray) -> np.ndarray:
        base = eval_array(F, {var: np.asarray([x])})
        if base[0] <= 0:
            raise PreconditionError(f"F must be positive; failed at x = {x!r}")
        shifted = eval_array(F, {var: ps * x})
        if np.any(shifted <= 0):
            raise PreconditionError(f"F must be positive on the lambda window at x = {x!r}")
        return np.abs(shifted / base[0] - 1.0)

    return _scan(row_fn, xs, params, classify_tol, value_tol, map_rows)


def condition_scan_310(
    xi: Expr,
    lambda_interval,
    x_grid: GeometricGrid,
    lambda_count: int = REFINE_COUNT,
    integer_mode: bool = False,
    classify_tol: float = RATIO_CLASSIFY_TOL,
    value_tol: float = VALUE_TOL,
    var: str = "x",
    map_rows=None,
) -> ScanReport:
    """Scan ``(xi(lam x) - xi(x)) * ln x`` over a lambda window.

    This residual must vanish uniformly on compacta for ``x^xi(x)`` to be
    slowly varying.  The matrix keeps signed residuals so oscillation shows
    its shape; suprema are still absolute.  ``integer_mode`` reruns the
    supplied grid as a consecutive-integer walk, which exposes the classic
    failure a geometric grid would average away."""
    a, b = _check_interval(lambda_interval, "lambda interval")
    if a <= 0:
        raise PreconditionError("lambda interval must sit in (0, inf)")
    if lambda_count < MIN_PARAM_COUNT:
        raise PreconditionError(f"lambda_count must be >= {MIN_PARAM_COUNT}")
    if integer_mode and not x_grid.integer_mode:
        x_grid = GeometricGrid(x_grid.start, x_grid.ratio, x_grid.count, integer_mode=True)
    xs = np.asarray(x_grid.points())
    params = np.linspace(a, b, lambda_count)

    def row_fn(x: float, ps: np.ndarray) -> np.ndarray:
        at_x = eval_array(xi, {var: np.asarray([x])})[0]
        at_lx = eval_array(xi, {var: ps * x})
        return (at_lx - at_x) * math.log(x)

    return _scan(row_fn, xs, params, classify_tol, value_tol, map_rows)


# ---------------------------------------------------------------------------
# low-discrepancy inequality check

def halton_points(count: int, dims: int, skip: int = 20) -> np.ndarray:
    """Deterministic Halton sequence in (0, 1)^dims (bases 2, 3, 5, ...)."""
    bases = (2, 3, 5, 7, 11, 13)[:dims]
    out = np.empty((count, dims))
    for d, base in enumerate(bases):
        for i in range(count):
            n = i + 1 + skip
            value, f = 0.0, 1.0
            while n > 0:
                f /= base
                n, digit = divmod(n, base)
                value += digit * f
            out[i, d] = value
    return out


@dataclass(frozen=True)
class Region:
    """Axis-aligned sampling box for (x, u, v)."""

    x: tuple[float, float]
    u: tuple[float, float]
    v: tuple[float, float]

    def __post_init__(self):
        for name in ("x", "u", "v"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise PreconditionError(f"region {name} range needs lo <= hi")


@dataclass(frozen=True)
class HiViolation:
    x: float
    u: float
    v: float
    lhs: float
    rhs: float


@dataclass(frozen=True)
class HiReport:
    samples: int
    violations: tuple[HiViolation, ...]
    max_margin: float  # max of lhs - rhs over all samples; <= 0 means clean
    ok: bool


def hi_check(H: Expr, sample_count: int, region: Region) -> HiReport:
    """Check ``H(x, u) <= H(x+u, v) + H(x, u+v)`` on Halton samples.

    ``H`` is an expression in the variables x and u; the shifted arguments
    are produced by substitution.  Violations beyond a relative slack of
    1e-12 are collected with their sample points."""
    if sample_count < 1:
        raise PreconditionError("sample_count must be positive")
    unit = halton_points(sample_count, 3)
    xs = region.x[0] + unit[:, 0] * (region.x[1] - region.x[0])
    us = region.u[0] + unit[:, 1] * (region.u[1] - region.u[0])
    vs = region.v[0] + unit[:, 2] * (region.v[1] - region.v[0])

    lhs = eval_array(H, {"x": xs, "u": us})
    rhs = eval_array(H, {"x": xs + us, "u": vs}) + eval_array(H, {"x": xs, "u": us + vs})
    slack = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    bad = lhs > rhs + slack
    violations = tuple(
        HiViolation(float(xs[i]), float(us[i]), float(vs[i]), float(lhs[i]), float(rhs[i]))
        for i in np.flatnonzero(bad)
    )
    margin = float(np.max(lhs - rhs))
    return HiReport(
        samples=sample_count,
        violations=violations,
        max_margin=margin,
        ok=not bool(bad.any()),
    )


@dataclass(frozen=True)
class GuctReport:
    hi: HiReport
    monotone_ok: bool
    monotone_detail: str
    pointwise: tuple[tuple[float, LimitVerdict], ...]  # (probe u, verdict)
    pointwise_ok: bool
    scan: ScanReport

    @property
    def hypotheses_ok(self) -> bool:
        return self.hi.ok and self.monotone_ok and self.pointwise_ok


def guct_diagnose(
    H: Expr,
    m: Expr,
    u_interval,
    x_grid: GeometricGrid,
    u_count: int = REFINE_COUNT,
    sample_count: int = 1000,
    classify_tol: float = RATIO_CLASSIFY_TOL,
    value_tol: float = VALUE_TOL,
    map_rows=None,
) -> GuctReport:
    """Full diagnosis for the product form ``G = H * m``.

    Hypotheses measured: the triangle-style inequality for H on Halton
    samples (u and v both drawn from ``u_interval``), monotonicity of m
    along x, and pointwise decay of G at probe u values.  The conclusion
    (uniform decay over the whole u interval) is then scanned."""
    a, b = _check_interval(u_interval, "u interval")
    xs = np.asarray(x_grid.points())
    region = Region(x=(float(xs[0]), float(xs[-1])), u=(a, b), v=(a, b))
    hi = hi_check(H, sample_count, region)

    dense = np.geomspace(xs[0], xs[-1], 257)
    m_vals = eval_array(m, {"x": dense})
    slack = 1e-12 * max(1.0, float(np.max(np.abs(m_vals))))
    drops = np.flatnonzero(np.diff(m_vals) < -slack)
    monotone_ok = drops.size == 0
    if monotone_ok:
        monotone_detail = "m is nondecreasing along the sampled range"
    else:
        at = float(dense[drops[0]])
        monotone_detail = f"m decreases near x = {at:.6g}"

    G = Bin("*", H, m)
    probes = np.linspace(a, b, 5)
    pointwise = []
    pointwise_ok = True
    for u0 in probes:
        vals = eval_array(G, {"x": xs, "u": float(u0)})
        verdict = classify_limit(vals, classify_tol)
        pointwise.append((float(u0), verdict))
        if not (verdict.converges and abs(verdict.value) <= value_tol):
            pointwise_ok = False

    scan = uct_scan(G, (a, b), x_grid, u_count, classify_tol, value_tol, map_rows)
    return GuctReport(
        hi=hi,
        monotone_ok=monotone_ok,
        monotone_detail=monotone_detail,
        pointwise=tuple(pointwise),
        pointwise_ok=pointwise_ok,
        scan=scan,
    )


# ---------------------------------------------------------------------------
# multiplicative closure

@dataclass(frozen=True)
class MultClosureReport:
    xs: tuple[float, ...]
    step_lam: tuple[float, ...]  # (f(lam x) - f(x)) ln x
    step_mu: tuple[float, ...]  # (f(mu lam x) - f(lam x)) ln x
    combined: tuple[float, ...]  # (f(lam mu x) - f(x)) ln x
    max_ulp_deviation: float
    identity_ok: bool  # combined == step_lam + step_mu within 4 ulps
    verdicts: tuple[LimitVerdict, LimitVerdict, LimitVerdict] | None


def mult_closure_residual(
    f: Expr,
    lam: float,
    mu: float,
    x_grid: GeometricGrid,
    var: str = "x",
    classify_tol: float = RATIO_CLASSIFY_TOL,
) -> MultClosureReport:
    """Decompose the lam*mu residual into the lam step plus the mu step.

    All three columns are built from one shared set of f evaluations, so
    the decomposition is an arithmetic identity up to a few ulps."""
    if lam <= 0 or mu <= 0:
        raise PreconditionError("lam and mu must be positive")
    xs = np.asarray(x_grid.points())
    lnx = np.log(xs)
    f_base = eval_array(f, {var: xs})
    f_lam = eval_array(f, {var: lam * xs})
    f_both = eval_array(f, {var: mu * (lam * xs)})
    step_lam = (f_lam - f_base) * lnx
    step_mu = (f_both - f_lam) * lnx
    combined = (f_both - f_base) * lnx

    diff = np.abs((step_lam + step_mu) - combined)
    scale = np.maximum.reduce([np.abs(step_lam), np.abs(step_mu), np.abs(combined)])
    ulp = np.spacing(np.maximum(scale, np.finfo(float).tiny))
    ulps = diff / ulp
    max_ulps = float(np.max(ulps)) if ulps.size else 0.0

    verdicts = None
    if xs.size >= MIN_SAMPLES:
        verdicts = (
            classify_limit(step_lam, classify_tol),
            classify_limit(step_mu, classify_tol),
            classify_limit(combined, classify_tol),
        )
    return MultClosureReport(
        xs=tuple(float(x) for x in xs),
        step_lam=tuple(float(v) for v in step_lam),
        step_mu=tuple(float(v) for v in step_mu),
        combined=tuple(float(v) for v in combined),
        max_ulp_deviation=max_ulps,
        identity_ok=max_ulps <= 4.0,
        verdicts=verdicts,
    )


def interval_expand(a: float, b: float, n: int) -> tuple[float, float]:
    """n-fold product expansion of a ratio window: ``((a/b)^n, (b/a)^n)``.

    ``n = 0`` is the identity and returns the window itself."""
    if a <= 0:
        raise PreconditionError(f"a must be positive, got {a!r}")
    if a >= b:
        raise PreconditionError(f"need a < b, got a={a!r}, b={b!r}")
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n!r}")
    if n == 0:
        return (float(a), float(b))
    return ((a / b) ** n, (b / a) ** n)


# ---------------------------------------------------------------------------
# integral asymptotics

@dataclass(frozen=True)
class AsymRow:
    x: float
    lhs: float  # int_x^{lam x} h/t dt
    rhs: float  # ln(lam)/(ln(lam)+ln(x)) * int_1^x h/t dt
    residual: float  # lhs - rhs
    lcond: float  # (L(h)(lam x) - L(h)(x)) * ln x


@dataclass(frozen=True)
class AsymReport:
    lam: float
    bound: float
    rows: tuple[AsymRow, ...]
    residual_verdict: LimitVerdict | None
    lcond_verdict: LimitVerdict | None
    bound_ok: bool
    bound_detail: str
    quad_converged: bool


def integral_asym_residual(
    h: Expr,
    lam: float,
    x_grid: GeometricGrid,
    bound: float,
    tol: QuadTolerance = QuadTolerance(),
    var: str = "x",
    classify_tol: float = RATIO_CLASSIFY_TOL,
) -> AsymReport:
    """Residual of the window-integral asymptotic for bounded positive h.

    For each grid x the window integral over [x, lam x] is compared with
    its predicted share of the full integral over [1, x].  For constant h
    the residual is exactly ``(ln lam)^2 c / (ln lam + ln x)``."""
    if lam <= 1.0:
        raise PreconditionError(f"lam must exceed 1, got {lam!r}")
    if bound <= 0:
        raise PreconditionError("bound must be positive")
    xs = np.asarray(x_grid.points())
    if xs[0] <= 1.0:
        raise PreconditionError("x grid must start above 1")

    sample = np.geomspace(1.0, lam * xs[-1], 512)
    h_vals = eval_array(h, {var: sample})
    slack = 1e-9 * bound
    too_big = np.flatnonzero(h_vals > bound + slack)
    nonpos = np.flatnonzero(h_vals <= 0.0)
    bound_ok = too_big.size == 0 and nonpos.size == 0
    if bound_ok:
        bound_detail = f"0 < h <= {bound:g} on the sampled range"
    elif nonpos.size:
        bound_detail = f"h is not positive near x = {float(sample[nonpos[0]]):.6g}"
    else:
        bound_detail = f"h exceeds {bound:g} near x = {float(sample[too_big[0]]):.6g}"

    points = sorted({float(x) for x in xs} | {lam * float(x) for x in xs})
    cache = IntegralCache(h, var=var, tol=tol)
    integral_at = {}
    for p in points:
        integral_at[p] = cache.extend(p).value

    rows = []
    for x in (float(v) for v in xs):
        ix = integral_at[x]
        ilx = integral_at[lam * x]
        lnx = math.log(x)
        lhs = ilx - ix
        rhs = (math.log(lam) / (math.log(lam) + lnx)) * ix
        lcond = (ilx / math.log(lam * x) - ix / lnx) * lnx
        rows.append(AsymRow(x=x, lhs=lhs, rhs=rhs, residual=lhs - rhs, lcond=lcond))

    residual_verdict = lcond_verdict = None
    if xs.size >= MIN_SAMPLES:
        residual_verdict = classify_limit([r.residual for r in rows], classify_tol)
        lcond_verdict = classify_limit([r.lcond for r in rows], classify_tol)
    return AsymReport(
        lam=float(lam),
        bound=float(bound),
        rows=tuple(rows),
        residual_verdict=residual_verdict,
        lcond_verdict=lcond_verdict,
        bound_ok=bound_ok,
        bound_detail=bound_detail,
        quad_converged=cache.converged,
    )
