import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from duffing_decay.model import (ForcingSeries, Linear, ModelError, ModelSpec, PiecewiseLinear,
                                 PolyFourier, SinePerturbed, dump_model, eval_g, eval_g_x,
                                 load_model, mathieu_model, model_to_dict)

from conftest import TWO_PI, random_model

CONST = ForcingSeries.constant


def test_eval_g_examples():
    assert eval_g(ModelSpec("l", 1, TWO_PI, Linear(0.34)), 1.3, 2.0) == pytest.approx(0.68)
    pw = ModelSpec("p", 1, TWO_PI, PiecewiseLinear(CONST(TWO_PI, 0.45), CONST(TWO_PI, 0.3)))
    assert eval_g(pw, 0.0, -2.0) == pytest.approx(-0.6)
    assert eval_g(pw, 0.0, 2.0) == pytest.approx(0.9)
    sp = ModelSpec("s", 1, TWO_PI, SinePerturbed(0.2, 0.05))
    assert eval_g(sp, 0.0, math.pi) == pytest.approx(0.628319, abs=1e-6)


def test_eval_g_x_examples():
    assert eval_g_x(ModelSpec("l", 1, TWO_PI, Linear(0.34)), 4.0, -7.0) == 0.34
    assert eval_g_x(ModelSpec("s", 1, TWO_PI, SinePerturbed(0.2, 0.05)), 0.0, 0.0) == pytest.approx(0.25)
    pw = ModelSpec("p", 1, TWO_PI, PiecewiseLinear(CONST(TWO_PI, 0.45), CONST(TWO_PI, 0.3)))
    assert eval_g_x(pw, 1.0, -0.5) == 0.3
    assert eval_g_x(pw, 1.0, 0.5) == 0.45
    assert eval_g_x(pw, 1.0, 0.0) == 0.45


def test_forcing_series_evaluation():
    s = ForcingSeries(TWO_PI, 0.5, ((1, 1.0, 0.0), (3, 0.0, 2.0)))
    t = 0.7
    assert s(t) == pytest.approx(0.5 + math.cos(t) + 2 * math.sin(3 * t), abs=1e-14)
    assert s.bounds() == (-2.5, 3.5)


def test_forcing_series_rejects_bad_orders():
    with pytest.raises(ModelError):
        ForcingSeries(1.0, 0.0, ((2, 1.0, 0.0), (1, 1.0, 0.0)))
    with pytest.raises(ModelError):
        ForcingSeries(1.0, 0.0, ((1, 1.0, 0.0), (1, 1.0, 0.0)))
    with pytest.raises(ModelError):
        ForcingSeries(0.0)


def test_model_rejects_period_mismatch():
    with pytest.raises(ModelError, match="period mismatch"):
        ModelSpec("m", 1, TWO_PI, Linear(1.0), ForcingSeries(3.0, 0.0, ((1, 1.0, 0.0),)))


LINEAR_DOC = {"name": "lin", "c": 1, "T": {"two_pi_multiple": 1}, "g": {"type": "linear", "k": 0.34},
              "h": {"mean": 0, "harmonics": [{"n": 1, "cos": 1, "sin": 0}]}}


def test_load_model_linear():
    m = load_model(json.dumps(LINEAR_DOC))
    assert m.T == TWO_PI and m.c == 1.0 and m.g == Linear(0.34)
    assert m.h.harmonics == ((1, 1.0, 0.0),)


def test_load_model_period_mismatch():
    doc = dict(LINEAR_DOC, h={"period": 3.0, "mean": 0, "harmonics": [{"n": 1, "cos": 1}]})
    with pytest.raises(ModelError, match="period mismatch"):
        load_model(json.dumps(doc))


def test_load_model_damped_mathieu():
    c, eps = 0.3, 0.1
    doc = {"name": "mathieu", "c": c, "T": {"two_pi_multiple": 1},
           "g": {"type": "poly_fourier", "coeffs": [
               {"power": 1, "p": {"mean": (1 + c * c) / 4, "harmonics": [{"n": 1, "cos": eps / 4}]}}]},
           "h": {"mean": 0, "harmonics": []}}
    m = load_model(json.dumps(doc))
    assert m.is_linear
    t, x = 1.1, 0.7
    assert eval_g(m, t, x) == pytest.approx(0.25 * (1 + c * c + eps * math.cos(t)) * x, rel=1e-14)
    assert m.g == mathieu_model(c, eps).g


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d.pop("c"), "c"),
    (lambda d: d.update(c="one"), "c"),
    (lambda d: d["g"].update(type="cubic"), "g.type"),
    (lambda d: d["g"].pop("k"), "g.k"),
    (lambda d: d["h"]["harmonics"][0].update(n=0), "h.harmonics[0].n"),
    (lambda d: d.update(T=-1.0), "T"),
])
def test_load_model_names_offending_field(mutate, field):
    doc = json.loads(json.dumps(LINEAR_DOC))
    mutate(doc)
    with pytest.raises(ModelError, match=field.replace("[", r"\[").replace("]", r"\]")):
        load_model(json.dumps(doc))


def test_load_model_invalid_json():
    with pytest.raises(ModelError, match="invalid JSON"):
        load_model("{not json")


@pytest.mark.parametrize("kind", ["linear", "poly_fourier", "sine_perturbed", "piecewise_linear"])
def test_round_trip(kind):
    m = random_model(np.random.default_rng(7), kind)
    again = load_model(dump_model(m))
    assert again == m
    assert model_to_dict(again) == model_to_dict(m)


@st.composite
def models(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    kind = draw(st.sampled_from(["linear", "poly_fourier", "sine_perturbed", "piecewise_linear"]))
    return random_model(np.random.default_rng(seed), kind)


samples = st.tuples(st.floats(-50, 50), st.floats(-5, 5))


@given(models(), st.lists(samples, min_size=1, max_size=20))
def test_g_is_periodic_in_t(model, points):
    for t, x in points:
        a, b = eval_g(model, t + model.T, x), eval_g(model, t, x)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


@given(models().filter(lambda m: not m.is_piecewise), st.lists(samples, min_size=1, max_size=20))
def test_derivative_matches_central_difference(model, points):
    d = 1e-5
    for t, x in points:
        fd = (eval_g(model, t, x + d) - eval_g(model, t, x - d)) / (2 * d)
        assert abs(fd - eval_g_x(model, t, x)) <= 1e-6


@given(models().filter(lambda m: m.is_piecewise), st.floats(-50, 50))
def test_piecewise_continuous_at_zero(model, t):
    scale = max(abs(model.g.a(t)), abs(model.g.b(t)))
    for x in (1e-12, -1e-12):
        assert abs(eval_g(model, t, x)) <= 1e-12 * scale


def test_piecewise_sign_convention():
    a, b = CONST(TWO_PI, 0.45), CONST(TWO_PI, 0.3)
    g = PiecewiseLinear(a, b)
    # a x+ - b x-  with x- = max(-x, 0)
    for x in (-1.5, -0.1, 0.2, 3.0):
        expected = 0.45 * max(x, 0) - 0.3 * max(-x, 0)
        assert g.value(0.0, x) == pytest.approx(expected)


def test_poly_fourier_rejects_constant_power():
    with pytest.raises(ModelError):
        PolyFourier(((0, CONST(TWO_PI, 1.0)),))
