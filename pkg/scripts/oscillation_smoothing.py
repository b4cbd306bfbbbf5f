"""Watch the averaging operator tame an oscillating exponent.

F(x) = x^(sin(x)/ln(x)) has log-ratios ln F(lam x) - ln F(x) that never
settle: sampled at integers with lam = pi they track -sin(n).  Yet the
averaged transform of a bounded oscillation converges.  This script
prints both sides of that story as tables.

    python3 scripts/oscillation_smoothing.py
    python3 scripts/oscillation_smoothing.py --start 5000 --count 12
"""

import argparse
import math

import numpy as np

from karamata_kit import (
    GeometricGrid,
    QuadTolerance,
    apply_L_points,
    classify_limit,
    parse,
    sv_test,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--start", type=float, default=1000.0,
                    help="first integer sample point (default 1000)")
    ap.add_argument("--count", type=int, default=16,
                    help="integer samples to show (default 16)")
    args = ap.parse_args()

    f = parse("x^(sin(x)/ln(x))")
    grid = GeometricGrid(args.start, 2.0, max(args.count, 33), integer_mode=True)
    rep = sv_test(f, lambdas=(math.pi,), grid=grid)
    track = next(t for t in rep.passes[0].tracks if t.lam == math.pi)

    print(f"verdict: {rep.verdict}")
    print(f"reason:  {rep.reason}")
    print()
    print("log-ratio ln F(pi n) - ln F(n) at integers, against -sin(n):")
    print(f"{'n':>8} {'log ratio':>14} {'-sin(n)':>14} {'gap':>10}")
    for n, lr in list(zip(track.xs, track.log_ratios))[: args.count]:
        target = -math.sin(n)
        print(f"{n:>8.0f} {lr:>14.6f} {target:>14.6f} {abs(lr - target):>10.2e}")

    # the same oscillation, averaged: sin under the operator flattens out
    xs = [10.0 * 4.0**k for k in range(10)]
    pts = apply_L_points(parse("sin(x)"), xs,
                         tol=QuadTolerance(max_evals=50_000_000))
    values = np.array([p.value for p in pts])
    verdict = classify_limit(values, tol=1e-2)
    print()
    print("averaged sin(x) along a geometric grid:")
    print(f"{'x':>12} {'averaged value':>16}")
    for x, v in zip(xs, values):
        print(f"{x:>12.4g} {v:>16.8f}")
    print(f"\nclassification: {verdict.kind}"
          + (f", value {verdict.value:.6f}" if verdict.value is not None else ""))


if __name__ == "__main__":
    main()
