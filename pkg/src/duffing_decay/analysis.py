"""Hypothesis checks for the c/2 decay theorems, parameter sweeps and report writers."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .floquet import Classification, discriminant, monodromy_floquet, theorem_constants
from .integrate import IntegrationError, IntegratorSettings
from .model import (ForcingSeries, ModelError, ModelSpec, PiecewiseLinear, eval_g_x,
                    model_from_dict, model_to_dict)
from .periodic import DecayError, ShootingError, decay_rate_iterates, find_periodic

MARGIN = 1e-9
ZERO_GRID = 4096

PASS, FAIL, INCONCLUSIVE, NA = "pass", "fail", "inconclusive", "n/a"


# -- hypothesis checking -------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    """Sampled quantities behind each verdict; ``derive_verdicts`` recomputes them.

    ``margin_min``/``margin_max`` bound ``g_x(t, x) - alpha(t)`` over the grid.
    ``a_range``/``b_range`` are sampled (inf, sup) of the piecewise
    coefficients, ``None`` for smooth models.  ``h_zero_count`` is ``None``
    when h vanishes identically and is otherwise a lower bound (tangential
    zeros can be missed).
    """

    c: float
    T: float
    constants: tuple[float, float, float]
    box: tuple[float, float]
    samples: int
    gprime_inf: float
    gprime_sup: float
    margin_min: float
    margin_max: float
    alpha_mean: float
    smooth: bool
    a_range: tuple[float, float] | None
    b_range: tuple[float, float] | None
    h_zero_count: int | None
    h_zeros: tuple[float, ...] = field(default=(), repr=False)
    verdicts: dict[str, str] = field(default_factory=dict)
    notes: tuple[str, ...] = (
        "pointwise '>>' (>= everywhere, > on a set of positive measure) is sampled, not proven",
        "bounds on g_x are certified only on the sampled box, not for all x",
    )

    def as_dict(self) -> dict:
        return asdict(self)


def _strict_below(value: float, bound: float) -> str:
    if value < bound - MARGIN:
        return PASS
    if value > bound + MARGIN:
        return FAIL
    return INCONCLUSIVE


def _dominated(inf: float, sup: float, bound: float) -> str:
    """``f << bound`` from the sampled range of f."""
    if sup > bound + MARGIN:
        return FAIL
    if inf < bound - MARGIN:
        return PASS
    return INCONCLUSIVE


def _dominates(inf: float, sup: float, bound: float) -> str:
    """``f >> bound`` from the sampled range of f."""
    if inf < bound - MARGIN:
        return FAIL
    if sup > bound + MARGIN:
        return PASS
    return INCONCLUSIVE


def _all(*verdicts: str) -> str:
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return PASS


def derive_verdicts(r: BoundsReport | dict) -> dict[str, str]:
    """Verdicts as a pure function of the recorded numbers of a report."""
    r = r if isinstance(r, dict) else r.as_dict()
    quarter, stab, uniq = r["constants"]
    damped = PASS if r["c"] > 0 else FAIL
    v: dict[str, str] = {"damping": damped}
    if r["smooth"]:
        v["theorem1.1"] = _strict_below(r["gprime_sup"], stab)
        v["theorem1.2"] = _all(_dominates(r["margin_min"], r["margin_max"], 0.0),
                               _strict_below(quarter, r["alpha_mean"]))
        v["theorem1"] = _all(damped, v["theorem1.1"], v["theorem1.2"])
    else:
        v["theorem1.1"] = v["theorem1.2"] = v["theorem1"] = NA
    zeros = r["h_zero_count"]
    v["h_finite_zeros"] = PASS if zeros is not None else FAIL
    if r["a_range"] is None:
        for item in ("theorem2.1", "theorem2.2", "theorem2.3"):
            v[item] = NA
        return v
    windows = {"theorem2.1": (0.0, uniq), "theorem2.2": (0.0, stab), "theorem2.3": (quarter, stab)}
    for item, (low, high) in windows.items():
        checks = []
        for inf, sup in (r["a_range"], r["b_range"]):
            checks += [_dominates(inf, sup, low), _dominated(inf, sup, high)]
        v[item] = _all(damped, v["h_finite_zeros"], *checks)
    return v


def forcing_zeros(h: ForcingSeries, grid: int = ZERO_GRID) -> tuple[float, ...] | None:
    """Zeros of h on [0, T] from sign changes on a uniform grid refined by bisection.

    Returns ``None`` when h vanishes identically.
    """
    if h.is_zero:
        return None
    ts = np.linspace(0.0, h.period, grid + 1)
    vals = [h(t) for t in ts]
    zeros = []
    for i in range(grid):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            zeros.append(float(ts[i]))
        elif a * b < 0.0:
            zeros.append(brentq(h, ts[i], ts[i + 1], xtol=1e-14))
    if vals[-1] == 0.0:
        zeros.append(float(ts[-1]))
    return tuple(zeros)


def check_hypotheses(model: ModelSpec, box: tuple[float, float] = (-2.0, 2.0),
                     alpha: float | ForcingSeries | None = None, samples: int = 64) -> BoundsReport:
    """Sample g_x over ``[0, T] x box`` and test the c/2-decay hypotheses.

    ``alpha`` is the declared lower envelope of g_x; it defaults to the
    sampled pointwise minimum over x.
    """
    if samples < 16:
        raise ValueError("need at least 16 samples per axis")
    x_lo, x_hi = box
    if not x_hi > x_lo:
        raise ValueError("empty x box")
    T = model.T
    ts = np.linspace(0.0, T, samples, endpoint=False)
    xs = np.linspace(x_lo, x_hi, samples)
    gx = np.array([[eval_g_x(model, t, x) for x in xs] for t in ts])
    if alpha is None:
        alpha_t = gx.min(axis=1)
    elif isinstance(alpha, ForcingSeries):
        alpha_t = np.array([alpha(t) for t in ts])
    else:
        alpha_t = np.full(samples, float(alpha))
    margin = gx - alpha_t[:, None]
    smooth = not isinstance(model.g, PiecewiseLinear)
    a_range = b_range = None
    if not smooth:
        a_vals = [model.g.a(t) for t in ts]
        b_vals = [model.g.b(t) for t in ts]
        a_range = (min(a_vals), max(a_vals))
        b_range = (min(b_vals), max(b_vals))
    zeros = forcing_zeros(model.h)
    report = BoundsReport(
        c=model.c,
        T=T,
        constants=theorem_constants(model.c, T).as_tuple(),
        box=(float(x_lo), float(x_hi)),
        samples=samples,
        gprime_inf=float(gx.min()),
        gprime_sup=float(gx.max()),
        margin_min=float(margin.min()),
        margin_max=float(margin.max()),
        alpha_mean=float(alpha_t.mean()),
        smooth=smooth,
        a_range=a_range,
        b_range=b_range,
        h_zero_count=None if zeros is None else len(zeros),
        h_zeros=zeros or (),
    )
    return _with_verdicts(report)


def _with_verdicts(report: BoundsReport) -> BoundsReport:
    verdicts = derive_verdicts(report)
    object.__setattr__(report, "verdicts", verdicts)
    return report


# -- parameter sweeps ----------------------------------------------------------

CSV_HEADER = ("param,trace,det,mu1_re,mu1_im,mu2_re,mu2_im,modulus,classification,"
              "decay_rate,stable,x0,v0,residual,error").split(",")

TASKS = ("floquet", "periodic", "decay", "discriminant")


@dataclass(frozen=True)
class SweepRow:
    param: float
    trace: float | None = None
    det: float | None = None
    mu1: complex | None = None
    mu2: complex | None = None
    modulus: float | None = None
    classification: str | None = None
    decay_rate: float | None = None
    stable: bool | None = None
    x0: float | None = None
    v0: float | None = None
    residual: float | None = None
    error: str = ""

    def cells(self) -> list[str]:
        def num(q):
            return "" if q is None else fmt(q)

        mu = lambda z, part: "" if z is None else fmt(getattr(z, part))  # noqa: E731
        return [
            fmt(self.param), num(self.trace), num(self.det),
            mu(self.mu1, "real"), mu(self.mu1, "imag"), mu(self.mu2, "real"), mu(self.mu2, "imag"),
            num(self.modulus), self.classification or "", num(self.decay_rate),
            "" if self.stable is None else str(self.stable).lower(),
            num(self.x0), num(self.v0), num(self.residual), self.error,
        ]


def fmt(q: float) -> str:
    return format(float(q), ".17g")


def set_parameter(doc: dict, path: str, value: float) -> dict:
    """Return a copy of a model document with the scalar at ``path`` replaced.

    ``path`` is dotted with integer list indices (``g.k``, ``c``,
    ``g.coeffs.0.p.mean``).  ``epsilon`` addresses the damped Mathieu family:
    the first cosine harmonic of p_1 is set to ``epsilon / 4``.
    """
    doc = copy.deepcopy(doc)
    if path == "epsilon":
        coeffs = doc.get("g", {}).get("coeffs")
        if doc.get("g", {}).get("type") != "poly_fourier" or not coeffs:
            raise ModelError("parameter 'epsilon' needs a poly_fourier model")
        series = coeffs[0]["p"]
        harmonics = [hm for hm in series.get("harmonics", []) if hm.get("n") != 1]
        series["harmonics"] = [{"n": 1, "cos": value / 4.0, "sin": 0.0}] + harmonics
        return doc
    keys = path.split(".")
    node: Any = doc
    for key in keys[:-1]:
        node = node[int(key)] if isinstance(node, list) else node.get(key)
        if node is None:
            raise ModelError(f"parameter path '{path}' does not exist in the model")
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    elif isinstance(node, dict) and last in node and (
            last == "T" or isinstance(node[last], (int, float)) and not isinstance(node[last], bool)):
        node[last] = value
    else:
        raise ModelError(f"parameter path '{path}' does not address a scalar")
    return doc


def parse_range(spec: str) -> list[float]:
    """``a:b:n`` (n evenly spaced values, ends included) or a comma list."""
    spec = spec.strip()
    if not spec:
        return []
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be a:b:n, got {spec!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 0:
            raise ValueError("range count must be >= 0")
        return [float(q) for q in np.linspace(a, b, n)]
    return [float(q) for q in spec.split(",")]


def _floquet_cells(fd) -> dict:
    return dict(trace=fd.trace, det=fd.det, mu1=fd.multipliers[0], mu2=fd.multipliers[1],
                modulus=fd.modulus, classification=fd.classification.value,
                decay_rate=fd.decay_rate, stable=fd.stable)


def sweep_row(doc: dict, parameter: str, value: float, task: str,
              settings: IntegratorSettings | None) -> SweepRow:
    try:
        model = model_from_dict(set_parameter(doc, parameter, value))
        if task == "discriminant":
            delta = discriminant(model, None, settings)
            return SweepRow(value, trace=delta)
        if task == "floquet" and (model.is_linear or model.h.is_zero):
            return SweepRow(value, **_floquet_cells(monodromy_floquet(model, None, settings)))
        orbit = find_periodic(model, (0.0, 0.0), settings)
        cells = _floquet_cells(orbit.floquet)
        if task == "decay":
            cells["decay_rate"] = decay_rate_iterates(model, orbit, 1e-3, settings).rate
        return SweepRow(value, x0=orbit.X0.x, v0=orbit.X0.v, residual=orbit.residual, **cells)
    except (ModelError, IntegrationError, ShootingError, DecayError, ValueError) as exc:
        row = SweepRow(value, error=f"{type(exc).__name__}: {exc}")
        if isinstance(exc, ShootingError) and not math.isnan(exc.residual):
            row = SweepRow(value, residual=exc.residual, error=row.error)
        return row


def _row_job(args):
    return sweep_row(*args)


def sweep(model: ModelSpec | dict, parameter: str, values, task: str = "floquet",
          settings: IntegratorSettings | None = None, workers: int = 1) -> list[SweepRow]:
    """One row per value, in the given order whatever the worker count."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; choose from {TASKS}")
    doc = model if isinstance(model, dict) else model_to_dict(model)
    # surface bad paths before starting workers
    if values:
        set_parameter(doc, parameter, float(values[0]))
    jobs = [(doc, parameter, float(v), task, settings) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row_job, jobs))
    return [_row_job(j) for j in jobs]


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def find_transitions(rows: list[SweepRow], key=lambda r: (r.stable, r.classification)):
    """Adjacent parameter pairs across which ``key`` changes."""
    return [(a.param, b.param) for a, b in zip(rows, rows[1:]) if key(a) != key(b)]


def refine_transition(model: ModelSpec, parameter: str, lo: float, hi: float, key,
                      width: float = 1e-3, settings=None) -> tuple[float, float]:
    """Bisect ``[lo, hi]`` until narrower than ``width`` keeping ``key`` different at the ends."""
    doc = model_to_dict(model)
    k_lo = key(sweep_row(doc, parameter, lo, "floquet", settings))
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if key(sweep_row(doc, parameter, mid, "floquet", settings)) == k_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


# -- JSON reports --------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, Classification):
        return obj.value
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits; NaN/inf become null."""
    obj = _jsonable(obj) if _level == 0 else obj
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report(model: ModelSpec, settings: IntegratorSettings, result, warnings=()) -> str:
    return dumps({
        "model": model_to_dict(model),
        "settings": asdict(settings),
        "result": result,
        "warnings": list(warnings),
    }) + "\n"
