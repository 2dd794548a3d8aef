"""Oscillator definitions for x'' + c x' + g(t, x) = h(t).

Periodic coefficients (the forcing h and any t-dependence in g) are
truncated Fourier series.  Restoring forces form a closed set of variants
so that both g and dg/dx are evaluated exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Union

TWO_PI = 2.0 * math.pi


class ModelError(ValueError):
    """Raised for malformed or inconsistent model definitions."""


@dataclass(frozen=True)
class ForcingSeries:
    """T-periodic function ``mean + sum(a_n cos(2 pi n t/T) + b_n sin(2 pi n t/T))``.

    ``harmonics`` holds ``(n, cos_coeff, sin_coeff)`` triples with strictly
    increasing orders.
    """

    period: float
    mean: float = 0.0
    harmonics: tuple[tuple[int, float, float], ...] = ()

    def __post_init__(self):
        if not self.period > 0:
            raise ModelError(f"period must be positive, got {self.period}")
        harmonics = tuple((int(n), float(a), float(b)) for n, a, b in self.harmonics)
        last = 0
        for n, _, _ in harmonics:
            if n <= last:
                raise ModelError("harmonic orders must be positive and strictly increasing")
            last = n
        object.__setattr__(self, "harmonics", harmonics)
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "mean", float(self.mean))

    @classmethod
    def constant(cls, period: float, value: float) -> ForcingSeries:
        return cls(period, value)

    def __call__(self, t: float) -> float:
        if not self.harmonics:
            return self.mean
        # reduce the phase first so f(t + T) == f(t) to rounding
        phase = TWO_PI * math.fmod(t, self.period) / self.period
        total = self.mean
        for n, a, b in self.harmonics:
            total += a * math.cos(n * phase) + b * math.sin(n * phase)
        return total

    @property
    def is_constant(self) -> bool:
        return all(a == 0.0 and b == 0.0 for _, a, b in self.harmonics)

    @property
    def is_zero(self) -> bool:
        return self.mean == 0.0 and self.is_constant

    def bounds(self) -> tuple[float, float]:
        """Crude enclosure ``mean -/+ sum(|a_n| + |b_n|)``."""
        spread = sum(abs(a) + abs(b) for _, a, b in self.harmonics)
        return self.mean - spread, self.mean + spread


@dataclass(frozen=True)
class Linear:
    k: float

    def value(self, t, x):
        return self.k * x

    def slope(self, t, x):
        return self.k


@dataclass(frozen=True)
class PolyFourier:
    """``g(t, x) = sum_j p_j(t) x**j`` with powers ``j >= 1``."""

    coeffs: tuple[tuple[int, ForcingSeries], ...]

    def __post_init__(self):
        powers = [j for j, _ in self.coeffs]
        if any(j < 1 for j in powers) or len(set(powers)) != len(powers):
            raise ModelError("poly_fourier powers must be distinct integers >= 1")
        object.__setattr__(self, "coeffs", tuple(sorted(self.coeffs, key=lambda jp: jp[0])))

    def value(self, t, x):
        return sum(p(t) * x**j for j, p in self.coeffs)

    def slope(self, t, x):
        return sum(j * p(t) * x ** (j - 1) for j, p in self.coeffs)

    @property
    def is_linear(self) -> bool:
        return all(j == 1 for j, _ in self.coeffs)


@dataclass(frozen=True)
class SinePerturbed:
    """``g(t, x) = k x + delta sin(x)``."""

    k: float
    delta: float

    def value(self, t, x):
        return self.k * x + self.delta * math.sin(x)

    def slope(self, t, x):
        return self.k + self.delta * math.cos(x)


@dataclass(frozen=True)
class PiecewiseLinear:
    """``g(t, x) = a(t) x+ - b(t) x-`` with ``x+ = max(x, 0)``, ``x- = max(-x, 0)``.

    Equivalently ``a(t) x`` for ``x > 0`` and ``b(t) x`` for ``x < 0``.
    """

    a: ForcingSeries
    b: ForcingSeries

    def value(self, t, x):
        if x > 0:
            return self.a(t) * x
        if x < 0:
            return self.b(t) * x
        return 0.0

    def slope(self, t, x):
        # x == 0 takes the a-branch; the integrator never straddles a crossing
        return self.b(t) if x < 0 else self.a(t)

    def branch_value(self, t, x, branch):
        return (self.a(t) if branch > 0 else self.b(t)) * x

    def branch_slope(self, t, branch):
        return self.a(t) if branch > 0 else self.b(t)


RestoringForce = Union[Linear, PolyFourier, SinePerturbed, PiecewiseLinear]


def _series_in(g: RestoringForce) -> list[ForcingSeries]:
    if isinstance(g, PolyFourier):
        return [p for _, p in g.coeffs]
    if isinstance(g, PiecewiseLinear):
        return [g.a, g.b]
    return []


@dataclass(frozen=True)
class ModelSpec:
    """Full problem definition: damping ``c``, period ``T``, restoring force ``g``, forcing ``h``."""

    name: str
    c: float
    T: float
    g: RestoringForce
    h: ForcingSeries = field(default=None)

    def __post_init__(self):
        if not self.T > 0:
            raise ModelError(f"T must be positive, got {self.T}")
        if self.c < 0:
            raise ModelError(f"damping c must be non-negative, got {self.c}")
        if self.h is None:
            object.__setattr__(self, "h", ForcingSeries(self.T))
        for series in [self.h, *_series_in(self.g)]:
            if not math.isclose(series.period, self.T, rel_tol=1e-12):
                raise ModelError(f"period mismatch: series period {series.period} != T = {self.T}")

    @property
    def is_piecewise(self) -> bool:
        return isinstance(self.g, PiecewiseLinear)

    @property
    def is_linear(self) -> bool:
        """True when g is linear in x, so the variational matrix is orbit-independent."""
        return isinstance(self.g, Linear) or (isinstance(self.g, PolyFourier) and self.g.is_linear)


def eval_g(model: ModelSpec, t: float, x: float) -> float:
    return model.g.value(t, x)


def eval_g_x(model: ModelSpec, t: float, x: float) -> float:
    """dg/dx; for piecewise models the one-sided selector ``a(t)`` (x >= 0) or ``b(t)``."""
    return model.g.slope(t, x)


# -- configuration files -------------------------------------------------------


def _number(doc: dict, key: str, where: str) -> float:
    if key not in doc:
        raise ModelError(f"missing field '{where}{key}'")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"field '{where}{key}' must be a number, got {value!r}")
    return float(value)


def _series_from(doc: Any, T: float, where: str) -> ForcingSeries:
    if isinstance(doc, (int, float)) and not isinstance(doc, bool):
        return ForcingSeries(T, float(doc))
    if not isinstance(doc, dict):
        raise ModelError(f"field '{where}' must be an object with 'mean' and 'harmonics'")
    period = doc.get("period", T)
    if isinstance(period, dict):
        period = _period(period, where + ".period")
    if not math.isclose(float(period), T, rel_tol=1e-12):
        raise ModelError(f"period mismatch in '{where}': {period} != T = {T}")
    mean = _number(doc, "mean", where + ".") if "mean" in doc else 0.0
    harmonics = []
    for i, item in enumerate(doc.get("harmonics", [])):
        loc = f"{where}.harmonics[{i}]."
        if not isinstance(item, dict):
            raise ModelError(f"field '{loc[:-1]}' must be an object")
        n = item.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ModelError(f"field '{loc}n' must be a positive integer")
        harmonics.append((n, item.get("cos", 0.0), item.get("sin", 0.0)))
        for key in ("cos", "sin"):
            if key in item:
                _number(item, key, loc)
    try:
        return ForcingSeries(T, mean, tuple(harmonics))
    except ModelError as exc:
        raise ModelError(f"field '{where}': {exc}") from None


def _period(value: Any, where: str) -> float:
    if isinstance(value, dict):
        if set(value) != {"two_pi_multiple"}:
            raise ModelError(f"field '{where}' must be a number or {{'two_pi_multiple': number}}")
        return TWO_PI * _number(value, "two_pi_multiple", where + ".")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"field '{where}' must be a number")
    return float(value)


def model_from_dict(doc: dict) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    if "T" not in doc:
        raise ModelError("missing field 'T'")
    T = _period(doc["T"], "T")
    if not T > 0:
        raise ModelError("field 'T' must be positive")
    c = _number(doc, "c", "")
    gdoc = doc.get("g")
    if not isinstance(gdoc, dict) or "type" not in gdoc:
        raise ModelError("field 'g' must be an object with a 'type'")
    kind = gdoc["type"]
    if kind == "linear":
        g = Linear(_number(gdoc, "k", "g."))
    elif kind == "sine_perturbed":
        g = SinePerturbed(_number(gdoc, "k", "g."), _number(gdoc, "delta", "g."))
    elif kind == "piecewise_linear":
        for key in ("a", "b"):
            if key not in gdoc:
                raise ModelError(f"missing field 'g.{key}'")
        g = PiecewiseLinear(_series_from(gdoc["a"], T, "g.a"), _series_from(gdoc["b"], T, "g.b"))
    elif kind == "poly_fourier":
        coeffs = []
        items = gdoc.get("coeffs")
        if not isinstance(items, list) or not items:
            raise ModelError("field 'g.coeffs' must be a non-empty list")
        for i, item in enumerate(items):
            loc = f"g.coeffs[{i}]"
            power = item.get("power") if isinstance(item, dict) else None
            if isinstance(power, bool) or not isinstance(power, int):
                raise ModelError(f"field '{loc}.power' must be an integer")
            if "p" not in item:
                raise ModelError(f"missing field '{loc}.p'")
            coeffs.append((power, _series_from(item["p"], T, loc + ".p")))
        try:
            g = PolyFourier(tuple(coeffs))
        except ModelError as exc:
            raise ModelError(f"field 'g.coeffs': {exc}") from None
    else:
        raise ModelError(f"field 'g.type': unknown restoring force {kind!r}")
    h = _series_from(doc.get("h", 0.0), T, "h")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ModelError("field 'name' must be a string")
    return ModelSpec(name, c, T, g, h)


def load_model(document: str) -> ModelSpec:
    """Parse a JSON model document and validate it."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None
    return model_from_dict(doc)


def _series_to_dict(s: ForcingSeries) -> dict:
    return {
        "mean": s.mean,
        "harmonics": [{"n": n, "cos": a, "sin": b} for n, a, b in s.harmonics],
    }


def model_to_dict(model: ModelSpec) -> dict:
    g = model.g
    if isinstance(g, Linear):
        gdoc = {"type": "linear", "k": g.k}
    elif isinstance(g, SinePerturbed):
        gdoc = {"type": "sine_perturbed", "k": g.k, "delta": g.delta}
    elif isinstance(g, PiecewiseLinear):
        gdoc = {"type": "piecewise_linear", "a": _series_to_dict(g.a), "b": _series_to_dict(g.b)}
    else:
        gdoc = {
            "type": "poly_fourier",
            "coeffs": [{"power": j, "p": _series_to_dict(p)} for j, p in g.coeffs],
        }
    return {"name": model.name, "c": model.c, "T": model.T, "g": gdoc, "h": _series_to_dict(model.h)}


def dump_model(model: ModelSpec) -> str:
    return json.dumps(model_to_dict(model), indent=2)


# -- named families ------------------------------------------------------------


def mathieu_model(c: float, epsilon: float) -> ModelSpec:
    """Damped Mathieu oscillator ``x'' + c x' + (1 + c**2 + eps cos t) x / 4 = 0`` on T = 2 pi.

    With ``c = 0`` this is the undamped normal form whose discriminant
    decides whether the damped family decays at exactly ``c/2``.
    """
    p = ForcingSeries(TWO_PI, (1.0 + c * c) / 4.0, ((1, epsilon / 4.0, 0.0),))
    return ModelSpec(f"mathieu(c={c:g}, eps={epsilon:g})", c, TWO_PI, PolyFourier(((1, p),)))


def linear_model(c: float, k: float, h: ForcingSeries | None = None, T: float = TWO_PI) -> ModelSpec:
    return ModelSpec(f"linear(c={c:g}, k={k:g})", c, T, Linear(k), h)


def cos_forcing(amplitude: float = 1.0, T: float = TWO_PI) -> ForcingSeries:
    return ForcingSeries(T, 0.0, ((1, amplitude, 0.0),))
