"""Adaptive Dormand-Prince 5(4) integration of the oscillator and its variational system.

The state is ``(x, v)``; with ``variational=True`` it is extended by the
columns of the 2x2 sensitivity matrix ``M`` obeying ``M' = A(t) M`` with
``A = [[0, 1], [-p(t), -c]]`` and ``p = dg/dx`` along the base solution.

For piecewise-linear restoring forces every step is taken with a frozen
branch (``a(t)`` or ``b(t)``).  Sign changes of ``x`` are located on the
actual RK sub-step, the integration restarts there on the other branch, and
the crossing is recorded as an event.  Since the vector field is continuous
at ``x = 0`` no jump (saltation) correction of ``M`` is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import ModelSpec, PiecewiseLinear


class IntegrationError(RuntimeError):
    """Step-size underflow, step-count exhaustion or a non-finite state."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (reached t = {t:.17g})")
        self.t = t


@dataclass(frozen=True)
class PhasePoint:
    t: float
    x: float
    v: float

    def __post_init__(self):
        if not all(math.isfinite(q) for q in (self.t, self.x, self.v)):
            raise ValueError(f"non-finite phase point {self}")

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.v])


@dataclass(frozen=True)
class IntegratorSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float | None = None  # None -> T/16
    event_tol: float = 1e-13  # scaled by max(1, |t|)
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.rtol >= 1e-14:
            raise ValueError("rtol must be >= 1e-14")
        if not (self.atol > 0 and self.event_tol > 0):
            raise ValueError("atol and event_tol must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")

    def step_cap(self, model: ModelSpec) -> float:
        return self.max_step if self.max_step is not None else model.T / 16.0


@dataclass(frozen=True)
class Trajectory:
    """Piecewise cubic-Hermite record of one integration.

    Segment ``i`` spans ``[t[i], t[i+1]]`` with endpoint states ``y[i]``,
    ``y[i+1]`` and one-sided derivatives ``fstart[i]`` and ``fend[i]``.
    Event times are segment endpoints.
    """

    t: np.ndarray
    y: np.ndarray
    fstart: np.ndarray
    fend: np.ndarray
    events: tuple[tuple[float, int], ...] = ()

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    @property
    def final(self) -> PhasePoint:
        return PhasePoint(self.t1, float(self.y[-1, 0]), float(self.y[-1, 1]))

    @property
    def nsteps(self) -> int:
        return len(self.t) - 1

    def __call__(self, t: float) -> np.ndarray:
        return _hermite(self, t)


@dataclass(frozen=True)
class VariationalState:
    base: PhasePoint
    M: np.ndarray
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)


# Dormand & Prince (1980) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class _Field:
    """Right-hand side of the (optionally variational) first-order system."""

    def __init__(self, model: ModelSpec, variational: bool):
        self.model = model
        self.variational = variational
        self.c = model.c
        self.h = model.h
        self.g = model.g
        self.piecewise = isinstance(model.g, PiecewiseLinear)

    def __call__(self, t: float, y: np.ndarray, branch: int) -> np.ndarray:
        x, v = y[0], y[1]
        c = self.c
        if self.piecewise:
            p = self.g.branch_slope(t, branch)
            gval = p * x
        else:
            gval = self.g.value(t, x)
        acc = self.h(t) - c * v - gval
        if not self.variational:
            return np.array([v, acc])
        if not self.piecewise:
            p = self.g.slope(t, x)
        return np.array([v, acc, y[3], -p * y[2] - c * y[3], y[5], -p * y[4] - c * y[5]])


def _dp_step(f: _Field, t, y, h, k1, branch):
    ks = [k1]
    for i in range(1, 7):
        # the last row holds the 5th-order weights, so the final stage is f(y_new) (FSAL)
        y_stage = y + h * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
        ks.append(f(t + _C[i] * h, y_stage, branch))
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y_stage, err, ks[6]


def _hermite_eval(t0, t1, y0, y1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _hermite(traj: Trajectory, t: float) -> np.ndarray:
    ts = traj.t
    if not ts[0] <= t <= ts[-1]:
        raise ValueError(f"t = {t} outside trajectory span [{ts[0]}, {ts[-1]}]")
    i = int(np.searchsorted(ts, t, side="right")) - 1
    if ts[i] == t:
        return traj.y[i].copy()
    i = min(i, len(ts) - 2)
    return _hermite_eval(ts[i], ts[i + 1], traj.y[i], traj.y[i + 1], traj.fstart[i], traj.fend[i], t)


def _rms(vec, scale):
    return math.sqrt(float(np.mean((vec / scale) ** 2)))


def _initial_step(f, t, y, f0, branch, settings, cap, span):
    scale = settings.atol + settings.rtol * np.abs(y)
    d0 = _rms(y, scale)
    d1 = _rms(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cap, span)
    f1 = f(t + h0, y + h0 * f0, branch)
    d2 = _rms(f1 - f0, scale) / h0
    big = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if big <= 1e-15 else (0.01 / big) ** 0.2
    return min(100 * h0, h1, cap, span)


def _initial_branch(model: ModelSpec, t0: float, y0: np.ndarray) -> int:
    for q in (y0[0], y0[1], model.h(t0)):
        if q != 0.0:
            return 1 if q > 0 else -1
    return 1


def _solve(model: ModelSpec, start: PhasePoint, t_end: float, settings: IntegratorSettings,
           variational: bool) -> Trajectory:
    if not t_end >= start.t:
        raise ValueError(f"t_end = {t_end} precedes start time {start.t}")
    f = _Field(model, variational)
    y = np.array([start.x, start.v, 1.0, 0.0, 0.0, 1.0] if variational else [start.x, start.v])
    t = float(start.t)
    branch = _initial_branch(model, t, y)
    k1 = f(t, y, branch)

    ts, ys, fs0, fs1, events = [t], [y], [], [], []
    if t_end == t:
        dim = len(y)
        return Trajectory(np.array(ts), np.array(ys), np.empty((0, dim)), np.empty((0, dim)))

    cap = settings.step_cap(model)
    h = _initial_step(f, t, y, k1, branch, settings, cap, t_end - t)
    rejected = False
    for _ in range(settings.max_steps):
        if t >= t_end:
            break
        last = t + h >= t_end or t_end - (t + h) < 1e-12 * max(1.0, abs(t_end))
        if last:
            h = t_end - t
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t)
        y_new, err, k7 = _dp_step(f, t, y, h, k1, branch)
        scale = settings.atol + settings.rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = _rms(err, scale)
        if not math.isfinite(enorm) or not np.all(np.isfinite(y_new)):
            if not np.all(np.isfinite(y)):
                raise IntegrationError("non-finite state", t)
            h *= 0.2
            rejected = True
            continue
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm**-0.2)
            rejected = True
            continue
        factor = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm**-0.2))
        if rejected:
            factor = min(1.0, factor)
        rejected = False
        t_next = t_end if last else t + h

        if f.piecewise:
            crossing = _locate_crossing(f, t, y, h, k1, y_new, k7, branch, settings)
            if crossing is not None:
                s, y_ev, k_left = crossing
                y_ev = y_ev.copy()
                y_ev[0] = 0.0
                t_ev = t + s
                branch = -branch
                events.append((t_ev, branch))
                fs0.append(k1)
                fs1.append(k_left)
                ts.append(t_ev)
                ys.append(y_ev)
                t, y = t_ev, y_ev
                k1 = f(t, y, branch)
                h = min(max(h - s, h * 0.5), cap)
                continue

        fs0.append(k1)
        fs1.append(k7)
        ts.append(t_next)
        ys.append(y_new)
        t, y, k1 = t_next, y_new, k7
        h = min(h * factor, cap)
    else:
        raise IntegrationError(f"exceeded {settings.max_steps} steps", t)

    return Trajectory(np.array(ts), np.array(ys), np.array(fs0), np.array(fs1), tuple(events))


def _locate_crossing(f, t, y, h, k1, y_new, k7, branch, settings):
    """Return ``(s, y(t+s), f_left)`` for the first sign change of x inside the step, or None."""
    grid = np.linspace(0.0, h, 9)
    xs = [y[0]]
    for s in grid[1:-1]:
        xs.append(_hermite_eval(t, t + h, y[:2], y_new[:2], k1[:2], k7[:2], t + s)[0])
    xs.append(y_new[0])
    hit = next((i for i in range(1, 9) if branch * xs[i] < 0), None)
    if hit is None:
        return None

    def x_after(s):
        return branch * _dp_step(f, t, y, s, k1, branch)[0][0]

    lo, hi = grid[hit - 1], grid[hit]
    if lo > 0.0 and x_after(lo) <= 0.0:
        lo = 0.0
    if x_after(hi) >= 0.0:
        if hi < h and x_after(h) < 0.0:
            hi = h
        else:
            return None
    if lo == 0.0 and branch * y[0] <= 0.0:
        # starting on the switching line; a crossing this close is tangential
        return None
    tol = settings.event_tol * max(1.0, abs(t))
    s = brentq(x_after, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    y_ev, _, k_left = _dp_step(f, t, y, s, k1, branch)
    return s, y_ev, k_left


def integrate(model: ModelSpec, start: PhasePoint, t_end: float,
              settings: IntegratorSettings | None = None) -> Trajectory:
    """Integrate ``x' = v, v' = h(t) - c v - g(t, x)`` from ``start`` to ``t_end``."""
    return _solve(model, start, t_end, settings or IntegratorSettings(), variational=False)


def integrate_variational(model: ModelSpec, start: PhasePoint, t_end: float,
                          settings: IntegratorSettings | None = None) -> VariationalState:
    """Co-integrate the base solution and its sensitivity matrix ``M`` (``M(start.t) = I``)."""
    traj = _solve(model, start, t_end, settings or IntegratorSettings(), variational=True)
    yf = traj.y[-1]
    M = np.array([[yf[2], yf[4]], [yf[3], yf[5]]])
    return VariationalState(traj.final, M, traj)


def interpolate(trajectory: Trajectory, t: float) -> PhasePoint:
    """Dense-output state at ``t``; exact at step endpoints."""
    y = _hermite(trajectory, t)
    return PhasePoint(float(t), float(y[0]), float(y[1]))
