"""End-to-end acceptance gate.  Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines."""

import math
import time

import numpy as np

from duffing_decay.analysis import (PASS, check_hypotheses, find_transitions, refine_transition,
                                    rows_to_csv, sweep, dumps)
from duffing_decay.floquet import (Classification, QUOTED_COEFFICIENT, discriminant,
                                   discriminant_coefficient, floquet_data, monodromy)
from duffing_decay.integrate import IntegratorSettings
from duffing_decay.model import linear_model, mathieu_model
from duffing_decay.periodic import (decay_rate_iterates, find_periodic, poincare_map,
                                    uniqueness_probe)

from conftest import TWO_PI, bridge_model, forced_linear, random_model, sine_model
from oracles import central_jacobian

KINDS = ["linear", "poly_fourier", "sine_perturbed", "piecewise_linear"]


def verdict(n, ok, detail):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _closed_form_multipliers(c, k, T):
    s = np.sqrt(complex(c * c - 4 * k))
    return sorted((np.exp((-c + s) / 2 * T), np.exp((-c - s) / 2 * T)), key=lambda z: (-abs(z), -z.imag))


def test_criterion_1_closed_form_linear_suite():
    tight = IntegratorSettings(rtol=1e-12, atol=1e-14)
    cases = [(1.0, k) for k in (-0.5, 0.1, 0.34, 1.0)] + [(0.5, 0.2)]
    start = time.perf_counter()
    worst = 0.0
    for c, k in cases:
        got = sorted(floquet_data(monodromy(linear_model(c, k), None, tight)).multipliers,
                     key=lambda z: (-abs(z), -z.imag))
        for mu, ref in zip(got, _closed_form_multipliers(c, k, TWO_PI)):
            worst = max(worst, abs(mu - ref) / abs(ref))
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-8 and elapsed < 5.0, f"max rel error {worst:.2e}, runtime {elapsed:.2f} s")


def test_criterion_2_jacobi_liouville():
    rng = np.random.default_rng(20240)
    worst = 0.0
    for i in range(20):
        model = random_model(rng, KINDS[i % 4])
        about = None if model.is_linear else find_periodic(model)
        worst = max(worst, monodromy(model, about).det_defect)
    verdict(2, worst <= 1e-7, f"max relative det defect {worst:.2e} over 20 models")


def test_criterion_3_mathieu_discriminant():
    base = mathieu_model(0.0, 0.0)
    d0 = discriminant(base, 0.0)
    deltas = {e: discriminant(base, e) for e in (0.05, 0.1, 0.2)}
    fit = discriminant_coefficient(base)
    ok = (abs(d0 + 2.0) <= 1e-9 and all(d < -2.0 - 1e-5 for d in deltas.values())
          and fit.spread <= 0.10 and fit.extrapolated < 0)
    detail = (f"Delta(0)+2 = {d0 + 2:.1e}; Delta(0.05,0.1,0.2) = "
              f"{', '.join(f'{d:.8f}' for d in deltas.values())}; coefficient {fit.extrapolated:.8f} "
              f"(spread {fit.spread:.1e}); quoted {QUOTED_COEFFICIENT:.6f} differs by a factor "
              f"{fit.extrapolated / QUOTED_COEFFICIENT:.3f} (-pi**2/16 = {-math.pi**2 / 16:.8f})")
    verdict(3, ok, detail)


def test_criterion_4_smooth_model_end_to_end():
    model = sine_model()
    check = check_hypotheses(model, (-2, 2), alpha=0.15)
    probe = uniqueness_probe(model, m=3)
    orbit = find_periodic(model)
    est = decay_rate_iterates(model, orbit)
    fd = orbit.floquet
    ok = (check.verdicts["theorem1"] == PASS and probe.unique
          and fd.classification is Classification.COMPLEX_PAIR
          and abs(fd.decay_rate - 0.25) <= 1e-6 and abs(est.rate - 0.25) <= 0.02 * 0.25)
    verdict(4, ok, f"theorem1={check.verdicts['theorem1']}, clusters={len(probe.clusters)}, "
                   f"{fd.classification.value}, Floquet rate {fd.decay_rate:.10f}, "
                   f"regression rate {est.rate:.4f}")


def test_criterion_5_piecewise_model_end_to_end():
    model = bridge_model()
    probe = uniqueness_probe(model, m=3)
    orbit = find_periodic(model)
    est = decay_rate_iterates(model, orbit)
    fd = orbit.floquet
    traj = orbit.samples
    worst_event = max((abs(traj(t)[0]) for t, *_ in traj.events), default=math.inf)
    ok = (probe.unique and fd.classification is Classification.COMPLEX_PAIR
          and abs(fd.modulus - math.exp(-math.pi)) <= 1e-6
          and abs(est.rate - 0.5) <= 0.02 * 0.5 and len(traj.events) > 0 and worst_event <= 1e-11)
    verdict(5, ok, f"clusters={len(probe.clusters)}, {fd.classification.value}, modulus "
                   f"{fd.modulus:.10f} (exp(-pi) = {math.exp(-math.pi):.10f}), regression rate "
                   f"{est.rate:.4f}, {len(traj.events)} events, max |x| at events {worst_event:.1e}")


def _is_resonant(k, c, T, tol=1e-9):
    # omega T = n pi: the multipliers coincide on the real axis
    n = math.sqrt(max(k - c * c / 4, 0.0)) * T / math.pi
    return abs(n - round(n)) <= tol and round(n) >= 1


def _regime(row):
    return row.stable, row.classification != "RealDistinct"


def test_criterion_6_k_sweep():
    c, T = 1.0, TWO_PI
    model = forced_linear(0.34)
    rows = sweep(model, "g.k", list(np.linspace(-0.5, 1.0, 16)), "floquet")
    problems, resonant = [], []
    for r in rows:
        k = r.param
        if k < -1e-12:
            good = not r.stable
        elif 1e-12 < k < c * c / 4:
            good = r.stable and r.classification == "RealDistinct"
        elif k > c * c / 4:
            expected = "RealDouble" if _is_resonant(k, c, T) else "ComplexPair"
            if expected == "RealDouble":
                resonant.append(k)
            good = (r.stable and r.classification == expected
                    and abs(r.decay_rate - c / 2) <= 1e-8)
        else:
            continue  # k = 0 and k = c**2/4 are the degenerate boundaries themselves
        if not good:
            problems.append((k, r.classification, r.stable))
    changes = find_transitions(rows, _regime)
    brackets = [refine_transition(model, "g.k", lo, hi, _regime) for lo, hi in changes]
    located = (len(brackets) == 2 and all(hi - lo <= 1e-3 for lo, hi in brackets)
               and brackets[0][0] <= 0.0 <= brackets[0][1] + 1e-12
               and brackets[1][0] <= 0.25 <= brackets[1][1])
    verdict(6, not problems and located,
            f"mismatches {problems}; transitions {[(round(lo, 6), round(hi, 6)) for lo, hi in brackets]}; "
            f"resonant RealDouble nodes (decay c/2) at k = {resonant}")


def test_criterion_7_jacobian_cross_check():
    rng = np.random.default_rng(77)
    worst = 0.0
    for i in range(10):
        model = random_model(rng, KINDS[i % 4])
        X = rng.uniform(-1, 1, 2)
        _, DP = poincare_map(model, X)
        fd = central_jacobian(lambda Y: poincare_map(model, Y)[0].state, X, 1e-6)
        worst = max(worst, float(np.max(np.abs(DP - fd))))

    spreads = []
    for model in (sine_model(), bridge_model()):
        orbit = find_periodic(model)
        direction = np.array([0.6, -0.8])
        scales = np.array([1e-3, 1e-4, 1e-5])
        rem = [np.max(np.abs(poincare_map(model, orbit.state + s * direction)[0].state
                             - orbit.state - orbit.monodromy @ (s * direction))) for s in scales]
        K = np.array(rem) / scales**2
        spreads.append(float(np.max(np.abs(K - np.median(K))) / np.median(K)))
    verdict(7, worst <= 1e-6 and max(spreads) <= 0.25,
            f"max |DP - FD| {worst:.1e} over 10 models; K relative spread "
            f"{', '.join(f'{s:.3f}' for s in spreads)} (sine, piecewise)")


def test_criterion_8_determinism():
    values = list(np.linspace(-0.5, 1.0, 16))
    model = forced_linear(0.34)
    first = rows_to_csv(sweep(model, "g.k", values, "floquet"))
    again = rows_to_csv(sweep(model, "g.k", values, "floquet"))
    parallel = rows_to_csv(sweep(model, "g.k", values, "floquet", workers=4))
    bridge_values = list(np.linspace(0.3, 0.6, 6))
    b1 = rows_to_csv(sweep(bridge_model(), "g.a.mean", bridge_values, "periodic", workers=1))
    bn = rows_to_csv(sweep(bridge_model(), "g.a.mean", bridge_values, "periodic", workers=3))
    r1 = dumps(check_hypotheses(sine_model(), (-2, 2), 0.15).as_dict())
    r2 = dumps(check_hypotheses(sine_model(), (-2, 2), 0.15).as_dict())
    verdict(8, first == again == parallel and b1 == bn and r1 == r2,
            f"floquet sweep {len(first)} bytes, periodic sweep {len(b1)} bytes, identical across "
            f"repeats and worker counts")
