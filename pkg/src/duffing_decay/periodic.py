"""Periodic solutions as fixed points of the time-T map, and their observed decay rate."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .floquet import FloquetData, Monodromy, floquet_data
from .integrate import (IntegrationError, IntegratorSettings, PhasePoint, Trajectory,
                        integrate_variational)
from .model import ModelSpec

RESIDUAL_TOL = 1e-10
CLUSTER_RADIUS = 1e-6
DECAY_WINDOW = (1e-10, 1e-3)


class ShootingError(RuntimeError):
    """Newton shooting did not converge."""

    def __init__(self, message: str, residual: float = math.nan, X: np.ndarray | None = None):
        super().__init__(message)
        self.residual = residual
        self.X = X


class DegenerateOrbitError(ShootingError):
    """``DP - I`` is singular: 1 is (numerically) a Floquet multiplier."""


class DecayError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodicOrbit:
    X0: PhasePoint
    residual: float
    samples: Trajectory = field(repr=False)
    floquet: FloquetData
    monodromy: np.ndarray = field(repr=False)
    iterations: int = 0

    @property
    def state(self) -> np.ndarray:
        return self.X0.state


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    stderr: float
    points_used: int
    window: tuple[float, float]
    distances: tuple[float, ...] = field(default=(), repr=False)
    offset: tuple[float, float] = (0.0, 0.0)


def _max_norm(d) -> float:
    return float(np.max(np.abs(d)))


def _flow(model, X, settings):
    vs = integrate_variational(model, PhasePoint(0.0, float(X[0]), float(X[1])), model.T, settings)
    return np.array([vs.base.x, vs.base.v]), vs.M, vs.trajectory


def poincare_map(model: ModelSpec, X: PhasePoint | np.ndarray,
                 settings: IntegratorSettings | None = None) -> tuple[PhasePoint, np.ndarray]:
    """``(P(X), DP(X))`` for the time-T map started at t = 0."""
    X = X.state if isinstance(X, PhasePoint) else np.asarray(X, dtype=float)
    PX, DP, _ = _flow(model, X, settings)
    return PhasePoint(model.T, float(PX[0]), float(PX[1])), DP


def find_periodic(model: ModelSpec, guess: PhasePoint | np.ndarray | tuple = (0.0, 0.0),
                  settings: IntegratorSettings | None = None, max_iter: int = 50) -> PeriodicOrbit:
    """Damped Newton iteration on ``G(X) = P(X) - X``."""
    X = guess.state if isinstance(guess, PhasePoint) else np.asarray(guess, dtype=float).copy()
    try:
        PX, DP, traj = _flow(model, X, settings)
    except IntegrationError as exc:
        raise ShootingError(f"integration failed at the initial guess: {exc}", math.inf, X) from exc
    G = PX - X
    res = _max_norm(G)
    step_norm = math.inf
    for it in range(max_iter + 1):
        if res <= RESIDUAL_TOL and (it > 0 and step_norm <= 1e-11 * (1 + _max_norm(X)) or res == 0.0):
            return _orbit(model, X, PX, DP, traj, res, it)
        if it == max_iter:
            break
        J = DP - np.eye(2)
        if np.linalg.cond(J) > 1e8:
            raise DegenerateOrbitError(
                "DP - I is singular: 1 is a Floquet multiplier (degenerate orbit)", res, X)
        step = -np.linalg.solve(J, G)
        lam = 1.0
        for _ in range(11):
            X_try = X + lam * step
            try:
                PX_try, DP_try, traj_try = _flow(model, X_try, settings)
                res_try = _max_norm(PX_try - X_try)
            except IntegrationError:
                res_try = math.inf
            if res_try < res or res_try <= RESIDUAL_TOL:
                break
            lam *= 0.5
        else:
            # no halving reduced the residual; accept if already converged
            if res <= RESIDUAL_TOL:
                return _orbit(model, X, PX, DP, traj, res, it)
            raise ShootingError(f"line search failed at residual {res:.3g}", res, X)
        step_norm = _max_norm(lam * step)
        X, PX, DP, traj, res = X_try, PX_try, DP_try, traj_try, res_try
        G = PX - X
    raise ShootingError(f"no convergence in {max_iter} iterations; last residual {res:.3g}", res, X)


def _orbit(model, X, PX, DP, traj, res, iterations) -> PeriodicOrbit:
    fd = floquet_data(Monodromy(DP, model.T, model.c, "orbit"))
    X0 = PhasePoint(0.0, float(X[0]), float(X[1]))
    return PeriodicOrbit(X0, res, traj, fd, DP, iterations)


@dataclass(frozen=True)
class StartOutcome:
    start: tuple[float, float]
    converged: bool
    X0: tuple[float, float] | None
    residual: float
    cluster: int | None
    error: str = ""


@dataclass(frozen=True)
class UniquenessReport:
    clusters: tuple[tuple[float, float], ...]
    outcomes: tuple[StartOutcome, ...]

    @property
    def unique(self) -> bool:
        return len(self.clusters) == 1


def _probe_one(args):
    model, start, settings = args
    try:
        orbit = find_periodic(model, start, settings)
        return True, (orbit.X0.x, orbit.X0.v), orbit.residual, ""
    except (ShootingError, IntegrationError) as exc:
        return False, None, getattr(exc, "residual", math.nan), str(exc)


def uniqueness_probe(model: ModelSpec, box=((-2.0, 2.0), (-2.0, 2.0)), m: int = 3,
                     settings: IntegratorSettings | None = None, workers: int = 1) -> UniquenessReport:
    """Shoot from an ``m x m`` grid of starts and cluster the fixed points found.

    Finding a single cluster is evidence for, not a proof of, uniqueness.
    """
    if m < 2:
        raise ValueError("grid needs m >= 2")
    (x_lo, x_hi), (v_lo, v_hi) = box
    starts = [(float(x), float(v)) for x in np.linspace(x_lo, x_hi, m) for v in np.linspace(v_lo, v_hi, m)]
    jobs = [(model, s, settings) for s in starts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_probe_one, jobs))
    else:
        results = [_probe_one(j) for j in jobs]

    clusters: list[tuple[float, float]] = []
    outcomes = []
    for start, (ok, X0, res, err) in zip(starts, results):
        idx = None
        if ok:
            for i, cl in enumerate(clusters):
                if max(abs(X0[0] - cl[0]), abs(X0[1] - cl[1])) <= CLUSTER_RADIUS:
                    idx = i
                    break
            else:
                clusters.append(X0)
                idx = len(clusters) - 1
        outcomes.append(StartOutcome(start, ok, X0, res, idx, err))
    return UniquenessReport(tuple(clusters), tuple(outcomes))


def poincare_iterates(model: ModelSpec, start: np.ndarray, n: int, settings=None) -> np.ndarray:
    """``start, P(start), ..., P^n(start)`` as an ``(n + 1, 2)`` array."""
    out = [np.asarray(start, dtype=float)]
    for _ in range(n):
        out.append(_flow(model, out[-1], settings)[0])
    return np.array(out)


def decay_rate_iterates(model: ModelSpec, orbit: PeriodicOrbit, d0=1e-3,
                        settings: IntegratorSettings | None = None, max_iter: int = 400,
                        retries: int = 3) -> DecayEstimate:
    """Least-squares slope of ``ln |P^n X - X0|`` against ``n T`` (positive = decaying).

    Only distances inside ``DECAY_WINDOW`` enter the fit.  ``d0`` is a
    scalar offset along x or an ``(dx, dv)`` pair; it is divided by 10 and
    retried when the iterates run away.
    """
    X0 = orbit.state
    offset = np.array([d0, 0.0]) if np.ndim(d0) == 0 else np.asarray(d0, dtype=float)
    lo, hi = DECAY_WINDOW
    for _ in range(retries + 1):
        dists = _iterate_distances(model, X0, offset, settings, max_iter, lo)
        if dists is not None:
            break
        offset = offset / 10.0
    else:
        raise DecayError("Poincare iterates diverge from the orbit (unstable orbit?)")

    n = np.arange(len(dists))
    d = np.array(dists)
    use = (d >= lo) & (d <= hi * (1 + 1e-12))
    if use.sum() < 4:
        raise DecayError(f"only {int(use.sum())} iterates inside the window [{lo:g}, {hi:g}]")
    fit = stats.linregress(n[use] * model.T, np.log(d[use]))
    return DecayEstimate(-float(fit.slope), float(fit.stderr), int(use.sum()), (lo, hi),
                         tuple(dists), (float(offset[0]), float(offset[1])))


def _iterate_distances(model, X0, offset, settings, max_iter, floor):
    d_start = _max_norm(offset)
    X = X0 + offset
    dists = [d_start]
    for _ in range(max_iter):
        try:
            X = _flow(model, X, settings)[0]
        except IntegrationError:
            return None
        dist = _max_norm(X - X0)
        if not math.isfinite(dist) or dist > 1e3 * max(d_start, 1e-3):
            return None
        dists.append(dist)
        if dist < floor:
            break
    if dists[-1] >= dists[0]:
        return None
    return dists
