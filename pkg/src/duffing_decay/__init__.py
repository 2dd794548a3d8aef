"""Existence, stability and decay rate of periodic solutions of x'' + cx' + g(t,x) = h(t)."""

from .analysis import BoundsReport, SweepRow, check_hypotheses, derive_verdicts, sweep
from .floquet import (Classification, FloquetData, Monodromy, discriminant, discriminant_coefficient,
                      floquet_data, monodromy, theorem_constants)
from .integrate import (IntegrationError, IntegratorSettings, PhasePoint, Trajectory,
                        VariationalState, integrate, integrate_variational, interpolate)
from .model import (ForcingSeries, Linear, ModelError, ModelSpec, PiecewiseLinear, PolyFourier,
                    SinePerturbed, dump_model, eval_g, eval_g_x, load_model)
from .periodic import (DecayEstimate, DegenerateOrbitError, PeriodicOrbit, ShootingError,
                       decay_rate_iterates, find_periodic, poincare_map, uniqueness_probe)

__version__ = "0.1.0"
