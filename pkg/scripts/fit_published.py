#!/usr/bin/env python3
"""Leading-exponent fit of the published lambda_1 values, with the closed forms.

    python scripts/fit_published.py --json fit.json --plot fit.dat
"""
import argparse
import json

from hankel_mineig.asymptotics import TWO_OVER_PI, fit_leading_exponent, predict
from hankel_mineig.pipeline import plot_table
from hankel_mineig.published import lambda1_points


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", default=None)
    ap.add_argument("--plot", default=None)
    args = ap.parse_args()

    pts = lambda1_points()
    fit = fit_leading_exponent(pts)
    print(f"y = {fit.intercept:.5f} + {fit.gradient:.5f} x")
    print(f"95% CI gradient [{fit.gradient_ci_low:.5f}, {fit.gradient_ci_high:.5f}]  2/pi = {TWO_OVER_PI:.6f}")
    print(f"adjusted R^2 {fit.r_squared_adjusted:.6f}")
    print()
    print(f"{'N':>5} {'lambda1':>10} {'leading':>8} {'nlo':>8} {'saddle':>8} {'old':>8} {'resid':>10}")
    for (N, lam), r in zip(pts, fit.residuals):
        p = predict(N)
        ratios = [p.lambda1_leading, p.lambda1_nlo, p.lambda1_saddle, p.lambda1_conjecture_old]
        print(f"{N:>5} {lam:>10.6f} " + " ".join(f"{v / lam:>8.4f}" for v in ratios) + f" {r:>10.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(fit.to_dict(), fh, indent=2)
    if args.plot:
        with open(args.plot, "w") as fh:
            fh.write(plot_table(fit))


if __name__ == "__main__":
    main()
