"""Trace how ratio residuals flatten as the base point grows.

For a slowly varying F the residual |F(lam x)/F(x) - 1| dies off
uniformly over compact lambda windows.  This script prints the supremum
ladder for a chosen F over successively larger x, then estimates the
variation index of a few reference functions so the slow cases sit next
to genuinely power-like ones.

    python3 scripts/uniformity_ladder.py
    python3 scripts/uniformity_ladder.py --f "ln(ln(x))" --rungs 6
"""

import argparse
import math

from karamata_kit import (
    GeometricGrid,
    karamata_uct_check,
    parse,
    rv_index,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--f", default="ln(x)", help="function of x (default ln(x))")
    ap.add_argument("--rungs", type=int, default=4,
                    help="number of x scales, two decades apart (default 4)")
    ap.add_argument("--lam-hi", type=float, default=2.0,
                    help="upper end of the lambda window (default 2)")
    args = ap.parse_args()

    f = parse(args.f)
    grid = GeometricGrid(100.0, 100.0, max(args.rungs, 4))
    rep = karamata_uct_check(f, (1.0, args.lam_hi), grid, lambda_count=33)

    print(f"F(x) = {args.f}, lambda in [1, {args.lam_hi:g}]")
    print(f"{'x':>12} {'sup |F(lam x)/F(x) - 1|':>26} {'worst lambda':>14}")
    for x, sup, lam in zip(rep.xs, rep.suprema, rep.sup_params):
        print(f"{x:>12.4g} {sup:>26.8f} {lam:>14.6f}")
    print(f"verdict: {rep.verdict}")
    if args.f == "ln(x)":
        final = math.log(args.lam_hi) / math.log(rep.xs[-1])
        print(f"analytic supremum at the last rung: ln({args.lam_hi:g})/ln(x)"
              f" = {final:.8f}")

    print()
    print("variation index estimates for reference functions:")
    print(f"{'F':>22} {'rho_hat':>10} {'spread':>10} {'verdict':>20}")
    for text in ("7", "ln(x)", "ln(x)^2", args.f, "x^0.5", "x^2 * ln(x)"):
        est = rv_index(parse(text), lambdas=(2.0, 10.0))
        print(f"{text:>22} {est.rho_hat:>10.4f} {est.spread:>10.2e}"
              f" {est.verdict:>20}")


if __name__ == "__main__":
    main()
