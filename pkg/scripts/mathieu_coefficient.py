"""Fit the eps**2 coefficient of the Hill discriminant of the damped Mathieu family.

    python3 scripts/mathieu_coefficient.py --c 0 --c 1
"""

import argparse
import math

from duffing_decay.floquet import QUOTED_COEFFICIENT, discriminant, discriminant_coefficient
from duffing_decay.integrate import IntegratorSettings
from duffing_decay.model import mathieu_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, action="append", default=None, help="damping (repeatable)")
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.025, 0.0125])
    args = ap.parse_args()

    tight = IntegratorSettings(rtol=1e-12, atol=1e-14)
    print(f"{'c':>6} {'eps':>8} {'Delta':>20} {'(Delta+2)/eps^2':>18}")
    for c in args.c or [0.0]:
        model = mathieu_model(c, 0.0)
        fit = discriminant_coefficient(model, args.eps, tight)
        for e, d, r in zip(fit.epsilons, fit.deltas, fit.ratios):
            print(f"{c:6.3f} {e:8.4f} {d:20.15f} {r:18.10f}")
        print(f"  Delta(0) = {discriminant(model, 0.0, tight):.15f}")
        print(f"  extrapolated {fit.extrapolated:.10f}  (-pi^2/16 = {-math.pi**2 / 16:.10f}, "
              f"quoted {QUOTED_COEFFICIENT:.10f}, ratio {fit.extrapolated / QUOTED_COEFFICIENT:.4f})")


if __name__ == "__main__":
    main()
