"""Compare Floquet and Poincare-iterate decay rates for the bundled model files.

    python3 scripts/decay_rates.py models/sine_perturbed.json models/bridge.json
"""

import argparse
from pathlib import Path

from duffing_decay.analysis import check_hypotheses
from duffing_decay.model import load_model
from duffing_decay.periodic import decay_rate_iterates, find_periodic, uniqueness_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("models", nargs="+")
    ap.add_argument("--probe", type=int, default=3, help="multi-start grid size")
    args = ap.parse_args()

    for path in args.models:
        model = load_model(Path(path).read_text())
        check = check_hypotheses(model, (-2, 2))
        orbit = find_periodic(model)
        probe = uniqueness_probe(model, m=args.probe)
        est = decay_rate_iterates(model, orbit)
        fd = orbit.floquet
        print(f"{model.name}:")
        print(f"  verdicts   {', '.join(f'{k}={v}' for k, v in check.verdicts.items() if v != 'n/a')}")
        print(f"  orbit      x0={orbit.X0.x:.10f} v0={orbit.X0.v:.10f}  clusters={len(probe.clusters)}")
        print(f"  floquet    {fd.classification.value}  modulus={fd.modulus:.10f}  rate={fd.decay_rate:.10f}")
        print(f"  iterates   rate={est.rate:.5f} +- {est.stderr:.1e} from {est.points_used} points")
        print(f"  c/2        {model.c / 2:.5f}")


if __name__ == "__main__":
    main()
