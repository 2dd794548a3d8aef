"""Command-line front end.

Exit status: 0 success, 1 analysis failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import analysis
from .floquet import discriminant, discriminant_coefficient, floquet_data, monodromy
from .integrate import IntegrationError, IntegratorSettings
from .model import ModelError, load_model, model_from_dict, model_to_dict
from .periodic import (DecayError, ShootingError, decay_rate_iterates, find_periodic,
                       uniqueness_probe)


class UsageError(Exception):
    pass


def _interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(q) for q in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return lo, hi


def _pair(text: str) -> tuple[float, float]:
    try:
        x, v = (float(q) for q in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,v, got {text!r}") from None
    return x, v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--rtol", type=float, default=1e-10)
    common.add_argument("--atol", type=float, default=1e-12)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = argparse.ArgumentParser(
        prog="duffing-decay",
        description="Periodic solutions, Floquet stability and decay rates of x'' + cx' + g(t,x) = h(t).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="test the decay-theorem hypotheses on a box")
    p.add_argument("--box", type=_interval, default=(-2.0, 2.0), help="x interval lo:hi")
    p.add_argument("--alpha", type=float, default=None, help="constant lower envelope of g_x")
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("find-periodic", parents=[common], help="Newton shooting for the T-periodic orbit")
    p.add_argument("--guess", type=_pair, default=(0.0, 0.0), help="x,v")
    p.add_argument("--probe", type=int, default=0, metavar="M", help="also run an MxM multi-start probe")
    p.add_argument("--box", type=_interval, default=(-2.0, 2.0), help="probe box, used for x and v")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("floquet", parents=[common], help="monodromy and Floquet data")
    p.add_argument("--epsilon", type=float, default=None,
                   help="damped Mathieu family parameter (also reports the discriminant)")
    p.add_argument("--guess", type=_pair, default=(0.0, 0.0))

    p = sub.add_parser("decay", parents=[common], help="decay rate from Poincare iterates")
    p.add_argument("--d0", type=float, default=1e-3)
    p.add_argument("--guess", type=_pair, default=(0.0, 0.0))

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV/JSON")
    p.add_argument("--param", required=True, help="dotted path, e.g. g.k, c, epsilon")
    p.add_argument("--range", required=True, dest="values", help="a:b:n or comma list")
    p.add_argument("--task", choices=analysis.TASKS, default="floquet")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("discriminant", parents=[common], help="Hill discriminant of the undamped normal form")
    p.add_argument("--epsilon", type=float, action="append", default=None,
                   help="repeatable; with none given, fits the eps**2 coefficient")
    return parser


def _settings(args) -> IntegratorSettings:
    try:
        return IntegratorSettings(rtol=args.rtol, atol=args.atol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _orbit_result(orbit) -> dict:
    return {
        "X0": [orbit.X0.x, orbit.X0.v],
        "residual": orbit.residual,
        "iterations": orbit.iterations,
        "events": [list(e) for e in orbit.samples.events],
        "floquet": orbit.floquet.as_dict(),
    }


def run(args) -> int:
    try:
        model = load_model(Path(args.model).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read model file: {exc}") from None
    settings = _settings(args)
    warnings: list[str] = []
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    if fmt == "csv" and args.command != "sweep":
        raise UsageError("--format csv is only available for sweep")

    if args.command == "check":
        r = analysis.check_hypotheses(model, args.box, args.alpha, args.samples)
        warnings += list(r.notes)
        result = r.as_dict()

    elif args.command == "find-periodic":
        orbit = find_periodic(model, args.guess, settings)
        result = _orbit_result(orbit)
        if args.probe:
            probe = uniqueness_probe(model, (args.box, args.box), args.probe, settings, args.workers)
            result["probe"] = {"clusters": [list(c) for c in probe.clusters],
                               "outcomes": [dataclasses.asdict(o) for o in probe.outcomes]}
            warnings.append("multi-start probing is evidence of uniqueness, not a proof")

    elif args.command == "floquet":
        if args.epsilon is not None or model.is_linear or model.h.is_zero:
            work = model
            result = {}
            if args.epsilon is not None:
                work = _with_epsilon(model, args.epsilon)
                result["epsilon"] = args.epsilon
                result["discriminant"] = discriminant(work, None, settings)
            m = monodromy(work, None, settings)
            result.update({"about": m.about, "monodromy": m.M, **floquet_data(m).as_dict()})
        else:
            orbit = find_periodic(model, args.guess, settings)
            result = {"about": "periodic orbit", "monodromy": orbit.monodromy, **orbit.floquet.as_dict(),
                      "X0": [orbit.X0.x, orbit.X0.v], "residual": orbit.residual}

    elif args.command == "decay":
        orbit = find_periodic(model, args.guess, settings)
        est = decay_rate_iterates(model, orbit, args.d0, settings)
        result = {"rate": est.rate, "stderr": est.stderr, "points_used": est.points_used,
                  "window": list(est.window), "distances": list(est.distances),
                  "floquet_decay_rate": orbit.floquet.decay_rate,
                  "classification": orbit.floquet.classification.value,
                  "half_damping": model.c / 2}

    elif args.command == "sweep":
        try:
            values = analysis.parse_range(args.values)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows = analysis.sweep(model, args.param, values, args.task, settings, args.workers)
        if fmt == "csv":
            _emit(analysis.rows_to_csv(rows), args.out)
            return 0
        result = [dict(zip(analysis.CSV_HEADER, row.cells())) for row in rows]

    else:  # discriminant
        if args.epsilon:
            result = {"discriminant": [{"epsilon": e, "delta": discriminant(model, e, settings)}
                                       for e in args.epsilon]}
        else:
            tight = dataclasses.replace(settings, rtol=min(settings.rtol, 1e-12), atol=min(settings.atol, 1e-14))
            fit = discriminant_coefficient(model, settings=tight)
            result = fit.as_dict()
            if not result["quoted_agrees"]:
                warnings.append(
                    f"fitted eps**2 coefficient {fit.extrapolated:.10g} disagrees with the quoted "
                    f"perturbative value {fit.quoted:.10g}")

    _emit(analysis.report(model, settings, result, warnings), args.out)
    return 0


def _with_epsilon(model, epsilon):
    return model_from_dict(analysis.set_parameter(model_to_dict(model), "epsilon", epsilon))


_VALUE_OPTS = ("--box", "--range", "--guess", "--epsilon", "--d0", "--alpha")


def _glue_values(argv: list[str]) -> list[str]:
    # argparse rejects option values such as "-2:2" or "-0.5,0"; bind them with "="
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg in _VALUE_OPTS:
            value = next(it, None)
            out.append(arg if value is None else f"{arg}={value}")
        else:
            out.append(arg)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_glue_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except (UsageError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, ShootingError, DecayError, ValueError) as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
