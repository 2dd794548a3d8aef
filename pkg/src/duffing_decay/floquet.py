"""Monodromy matrices, Floquet multipliers and exponents, and the Hill discriminant."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .integrate import IntegratorSettings, PhasePoint, integrate_variational
from .model import ForcingSeries, ModelSpec, PolyFourier, Linear

# classification / degeneracy thresholds, relative
DISC_TOL = 1e-8
INDEX_TOL = 1e-8

# Perturbative value quoted for the leading coefficient of Delta(eps) + 2.
# Numerically the coefficient is -pi**2/16; see discriminant_coefficient().
QUOTED_COEFFICIENT = -math.pi / 64


class Classification(str, enum.Enum):
    COMPLEX_PAIR = "ComplexPair"
    REAL_DISTINCT = "RealDistinct"
    REAL_DOUBLE = "RealDouble"


@dataclass(frozen=True)
class Monodromy:
    M: np.ndarray
    period: float
    c: float
    about: str = "zero"

    @property
    def det_defect(self) -> float:
        """Relative deviation of det M from the Liouville value exp(-cT)."""
        expected = math.exp(-self.c * self.period)
        return abs(float(np.linalg.det(self.M)) - expected) / expected


@dataclass(frozen=True)
class FloquetData:
    trace: float
    det: float
    multipliers: tuple[complex, complex]
    exponents: tuple[complex, complex]
    classification: Classification
    modulus: float
    decay_rate: float
    index: int
    period: float

    @property
    def stable(self) -> bool:
        return all(abs(mu) < 1.0 for mu in self.multipliers)

    def as_dict(self) -> dict:
        mu1, mu2 = self.multipliers
        lam1, lam2 = self.exponents
        return {
            "trace": self.trace,
            "det": self.det,
            "multipliers": [[mu1.real, mu1.imag], [mu2.real, mu2.imag]],
            "exponents": [[lam1.real, lam1.imag], [lam2.real, lam2.imag]],
            "classification": self.classification.value,
            "modulus": self.modulus,
            "decay_rate": self.decay_rate,
            "stable": self.stable,
            "index": self.index,
        }


def _log(mu: complex, T: float) -> complex:
    if mu == 0:
        return complex(-math.inf, 0.0)
    # +0.0 imaginary part puts negative reals on the +pi side of the branch cut
    mu = complex(mu.real, mu.imag if mu.imag != 0.0 else 0.0)
    return cmath.log(mu) / T


def multipliers_from(trace: float, det: float) -> tuple[complex, complex]:
    """Roots of ``mu**2 - trace*mu + det = 0``, larger modulus first."""
    disc = trace * trace - 4.0 * det
    if disc < 0.0:
        im = math.sqrt(-disc) / 2.0
        return complex(trace / 2.0, im), complex(trace / 2.0, -im)
    # avoid cancellation in the smaller root
    q = (trace + math.copysign(math.sqrt(disc), trace)) / 2.0
    if q == 0.0:
        return complex(0.0), complex(0.0)
    return complex(q), complex(det / q)


def floquet_data(m: Monodromy) -> FloquetData:
    M = np.asarray(m.M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("monodromy matrix is not finite")
    trace = float(M[0, 0] + M[1, 1])
    det = float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    mu1, mu2 = multipliers_from(trace, det)
    disc = trace * trace - 4.0 * det
    if abs(disc) <= DISC_TOL * max(1.0, trace * trace):
        kind = Classification.REAL_DOUBLE
    elif disc < 0.0:
        kind = Classification.COMPLEX_PAIR
    else:
        kind = Classification.REAL_DISTINCT
    lam1, lam2 = _log(mu1, m.period), _log(mu2, m.period)
    # det(I - M) = (1 - mu1)(1 - mu2)
    fixed = 1.0 - trace + det
    index = 0 if abs(fixed) <= INDEX_TOL * (1.0 + abs(trace) + abs(det)) else (1 if fixed > 0 else -1)
    return FloquetData(
        trace=trace,
        det=det,
        multipliers=(mu1, mu2),
        exponents=(lam1, lam2),
        classification=kind,
        modulus=abs(mu1),
        decay_rate=-max(lam1.real, lam2.real),
        index=index,
        period=m.period,
    )


def monodromy(model: ModelSpec, about=None, settings: IntegratorSettings | None = None) -> Monodromy:
    """Period map of the linearization about ``about`` (a PeriodicOrbit) or about x = 0.

    Linearizing about zero requires either a model linear in x (where the
    variational matrix does not depend on the base orbit) or an unforced
    model, for which x = 0 is itself a solution.
    """
    if about is None:
        if not (model.is_linear or model.h.is_zero):
            raise ValueError("x = 0 is not a solution of this forced nonlinear model; pass a periodic orbit")
        start, label = PhasePoint(0.0, 0.0, 0.0), "zero"
    else:
        if about.residual > 1e-8:
            raise ValueError(f"reference orbit residual {about.residual:.3g} exceeds 1e-8")
        start, label = about.X0, f"orbit at ({about.X0.x:.6g}, {about.X0.v:.6g})"
    vs = integrate_variational(model, start, start.t + model.T, settings)
    return Monodromy(vs.M, model.T, model.c, label)


def monodromy_floquet(model: ModelSpec, about=None, settings=None) -> FloquetData:
    return floquet_data(monodromy(model, about, settings))


# -- Hill discriminant of the damped Mathieu family ----------------------------


def undamped_form(model: ModelSpec, epsilon: float | None = None) -> ModelSpec:
    """Remove the damping of a linear periodic model by ``x = exp(-c t / 2) y``.

    The coefficient becomes ``p(t) - c**2/4`` and ``c`` becomes 0.  With
    ``epsilon`` given, the first cosine harmonic of ``p`` is set to
    ``epsilon / 4`` (the scaling of ``(1 + c**2 + eps cos t) / 4``).
    """
    g = model.g
    if isinstance(g, Linear):
        p = ForcingSeries(model.T, g.k)
    elif isinstance(g, PolyFourier) and g.is_linear:
        p = g.coeffs[0][1]
    else:
        raise ValueError("the discriminant needs a restoring force linear in x")
    if epsilon is not None:
        rest = tuple(hm for hm in p.harmonics if hm[0] != 1)
        first = next((hm for hm in p.harmonics if hm[0] == 1), (1, 0.0, 0.0))
        p = replace(p, harmonics=tuple(sorted(((1, epsilon / 4.0, first[2]),) + rest)))
    p = replace(p, mean=p.mean - model.c**2 / 4.0)
    return ModelSpec(model.name, 0.0, model.T, PolyFourier(((1, p),)), ForcingSeries(model.T))


def discriminant(model: ModelSpec, epsilon: float | None = None,
                 settings: IntegratorSettings | None = None) -> float:
    """Delta = y1(T) + y2'(T) for the undamped normal form of ``model``.

    ``y1``, ``y2`` are the canonical solutions with ``(y, y') = (1, 0)`` and
    ``(0, 1)``, i.e. the columns of the monodromy matrix, so Delta is its trace.
    """
    m = monodromy(undamped_form(model, epsilon), None, settings)
    return float(np.trace(m.M))


@dataclass(frozen=True)
class CoefficientFit:
    epsilons: tuple[float, ...]
    deltas: tuple[float, ...]
    ratios: tuple[float, ...]  # (Delta + 2) / eps**2
    extrapolated: float
    spread: float  # max relative deviation of the ratios from their mean
    quoted: float = QUOTED_COEFFICIENT

    @property
    def quoted_discrepancy(self) -> float:
        return abs(self.extrapolated - self.quoted) / abs(self.quoted)

    def as_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "deltas": list(self.deltas),
            "ratios": list(self.ratios),
            "extrapolated_coefficient": self.extrapolated,
            "ratio_spread": self.spread,
            "quoted_coefficient": self.quoted,
            "quoted_relative_discrepancy": self.quoted_discrepancy,
            "quoted_agrees": self.quoted_discrepancy < 0.1,
        }


def discriminant_coefficient(model: ModelSpec, epsilons=(0.05, 0.025, 0.0125),
                             settings: IntegratorSettings | None = None) -> CoefficientFit:
    """Fit ``Delta(eps) = -2 + C eps**2 + O(eps**4)`` on a halving sequence of eps.

    ``C`` is Richardson-extrapolated from the two smallest eps, assuming the
    ratios carry an ``eps**2`` correction.
    """
    settings = settings or IntegratorSettings(rtol=1e-12, atol=1e-14)
    eps = tuple(sorted((float(e) for e in epsilons), reverse=True))
    if len(eps) < 2:
        raise ValueError("need at least two epsilon values")
    deltas = tuple(discriminant(model, e, settings) for e in eps)
    ratios = tuple((d + 2.0) / e**2 for d, e in zip(deltas, eps))
    r = (eps[-2] / eps[-1]) ** 2
    extrapolated = (r * ratios[-1] - ratios[-2]) / (r - 1.0)
    mean = sum(ratios) / len(ratios)
    spread = max(abs(q - mean) for q in ratios) / abs(mean) if mean else math.inf
    return CoefficientFit(eps, deltas, ratios, extrapolated, spread)


@dataclass(frozen=True)
class TheoremConstants:
    quarter_c2: float
    stability_bound: float  # pi**2/T**2 + c**2/4
    uniqueness_bound: float  # (2 pi)**2/T**2 + c**2/4
    dirichlet_eigenvalues: tuple[float, ...]  # (2 n pi / T)**2, n = 1..4

    def as_tuple(self):
        return self.quarter_c2, self.stability_bound, self.uniqueness_bound


def theorem_constants(c: float, T: float) -> TheoremConstants:
    if not T > 0:
        raise ValueError("T must be positive")
    q = c * c / 4.0
    return TheoremConstants(
        quarter_c2=q,
        stability_bound=math.pi**2 / T**2 + q,
        uniqueness_bound=(2 * math.pi) ** 2 / T**2 + q,
        dirichlet_eigenvalues=tuple((2 * n * math.pi / T) ** 2 for n in range(1, 5)),
    )
