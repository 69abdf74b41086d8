import cmath
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borel_stokes.datum import (CauchyDatum, EntirePart, PoleTerm, datum_from_json, datum_to_json,
                                growth_bounds)
from borel_stokes.errors import AtPole

cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def random_datum(rng, n_poles=2, n_entire=2):
    poles = []
    for _ in range(n_poles):
        z = complex(*rng.uniform(-2, 2, 2))
        r = int(rng.integers(1, 4))
        poles.append((z, [complex(*rng.uniform(-1, 1, 2)) for _ in range(r - 1)] + [1.0 + 0.5j]))
    ent = [(complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2)) * (i % 2),
            int(rng.integers(0, 3))) for i in range(n_entire)]
    return CauchyDatum.from_parts(poles, ent)


def test_eval_examples():
    assert CauchyDatum.simple_pole(1.0).eval(0) == -1
    d = CauchyDatum.from_parts([(1.0, [1.0])], [(1.0, 1.0, 0)])
    assert abs(d.eval(0)) < 1e-15
    assert CauchyDatum.from_parts([(1.0, [0.0, 1.0])]).eval(3) == pytest.approx(0.25)


def test_eval_at_pole_raises():
    with pytest.raises(AtPole):
        CauchyDatum.simple_pole(1.0).eval(1.0 + 1e-14)
    # relative guard: a large pole modulus tolerates the same absolute offset
    CauchyDatum.simple_pole(1e6).eval(1e6 + 1e-3)


def test_pole_term_validation():
    with pytest.raises(ValueError):
        PoleTerm(0j, (1.0,))
    with pytest.raises(ValueError):
        PoleTerm(1.0, (1.0, 0.0))
    with pytest.raises(ValueError):
        CauchyDatum.from_parts([(1.0, [1.0]), (1.0, [2.0])])


def test_derivative_examples():
    d = CauchyDatum.simple_pole(1.0)
    d1 = d.derivative(1)
    assert d1.poles[0].coefficients == (0, -1)
    assert d.derivative(2).poles[0].coefficients == (0, 0, 2)
    z2 = CauchyDatum.from_parts(entire=[(1.0, 0.0, 2)])
    e = z2.derivative(2).entire
    assert e.terms == ((2, 0, 0),)
    assert z2.derivative(3).entire.terms == ()


def test_derivative_composes_structurally():
    rng = np.random.default_rng(1)
    for _ in range(5):
        d = random_datum(rng)
        for a, b in [(1, 2), (3, 1), (2, 2)]:
            lhs = d.derivative(a).derivative(b)
            rhs = d.derivative(a + b)
            for p, q in zip(lhs.poles, rhs.poles):
                assert np.allclose(p.coefficients, q.coefficients, rtol=1e-13)
            assert len(lhs.entire.terms) == len(rhs.entire.terms)
            zs = [0.3 + 0.1j, -0.7j]
            for z in zs:
                assert abs(lhs.entire.eval(z) - rhs.entire.eval(z)) < 1e-10 * (1 + abs(rhs.entire.eval(z)))


def test_derivative_matches_finite_difference():
    rng = np.random.default_rng(2)
    d = random_datum(rng)
    d1 = d.derivative(1)
    h = 1e-5
    n = 0
    while n < 20:
        z = complex(*rng.uniform(-3, 3, 2))
        if min(abs(z - p.location) for p in d.poles) < 0.3:
            continue
        fd = (d.eval(z + h) - d.eval(z - h)) / (2 * h)
        assert abs(fd - d1.eval(z)) < 1e-6 * max(1, abs(fd))
        n += 1


def test_log_derivative_matches_direct_and_scales():
    d = CauchyDatum.from_parts([(1.0, [1.0]), (2j, [0.5, 1.0])], [(1.0, 1.0, 1)])
    for m in (0, 1, 5):
        direct = d.derivative(m).eval(0.1 + 0.2j)
        assert abs(cmath.exp(d.log_derivative(0.1 + 0.2j, m)) - direct) < 1e-12 * abs(direct)
    # far beyond double range it stays finite
    lg = d.log_derivative(0.0, 400)
    assert np.isfinite(lg.real)


def test_reflect_examples():
    d = CauchyDatum.simple_pole(2 + 1j)
    r = d.reflect()
    assert r.poles[0].location == -2 - 1j
    assert r.poles[0].coefficients == (1,)
    z = CauchyDatum.from_parts(entire=[(1.0, 0.0, 1)])
    assert z.reflect().eval(0.7) == pytest.approx(0.7)


@settings(max_examples=30, deadline=None)
@given(cplx, cplx)
def test_reflect_values_and_involution(a, w):
    d = CauchyDatum.from_parts([(1.5 + 0.5j, [a + 1, 1.0]), (-1.0, [1.0])], [(a, w, 2)])
    r = d.reflect()
    z = 0.2 - 0.1j
    assert abs(r.eval(z) + d.eval(-z)) < 1e-9 * (1 + abs(d.eval(-z)))
    rr = r.reflect()
    assert rr.poles == d.poles
    assert abs(rr.entire.eval(z) - d.entire.eval(z)) < 1e-12 * (1 + abs(d.entire.eval(z)))


def test_growth_bounds_examples():
    gb = growth_bounds(EntirePart(((1.0, 0.0, 3),)))
    assert gb.order == 0 and gb.C2 == 0 and gb.degree == 3
    gb = growth_bounds(EntirePart(((1.0, 1.0, 0),)), margin=0.5)
    assert gb.as_tuple()[:3] == (1, 1.0, 1.5)
    gb = growth_bounds(EntirePart(((2.0, 3.0, 0),)), margin=0.5)
    assert gb.as_tuple()[:3] == (1, 2.0, 3.5)


def test_growth_bound_holds_on_rings():
    rng = np.random.default_rng(3)
    for _ in range(5):
        d = random_datum(rng, 0, 3)
        gb = d.growth_bounds()
        for r in (0.1, 3.0, 30.0):
            vals = np.abs(d.entire.eval(r * np.exp(2j * np.pi * np.arange(50) / 50)))
            assert np.all(vals <= gb.bound(r) * (1 + 1e-9))


def test_like_terms_merge_and_cancel():
    e = EntirePart(((1.0, 1.0, 0), (-1.0, 1.0, 0), (2.0, 0.0, 1)))
    assert e.terms == ((2.0, 0, 1),)


def test_linear_combination():
    a = CauchyDatum.simple_pole(1.0)
    b = CauchyDatum.from_parts([(1.0, [0.0, 1.0]), (1j, [2.0])])
    c = a + 2 * b
    z = 0.3
    assert abs(c.eval(z) - (a.eval(z) + 2 * b.eval(z))) < 1e-14


def test_json_round_trip():
    d = CauchyDatum.from_parts([(1.0, [1.0, 2j]), (-1j, [0.5])], [(1.0, 1.0, 2), (3.0, 0.0, 0)])
    back = datum_from_json(json.loads(json.dumps(datum_to_json(d))))
    assert back == d


@pytest.mark.parametrize("obj", [
    {"poles": [{"z": [0, 0], "coeffs": [[1, 0]]}]},
    {"poles": [{"z": [1, 0], "coeffs": [[1, 0]], "order": 1}]},
    {"poles": [], "extra": []},
    {"entire": [{"c": [1, 0], "lambda": [0, 0], "m": -1}]},
    {"entire": [{"c": [1, 0], "lambda": [0, 0], "m": 1.5}]},
    {"poles": [{"z": [1], "coeffs": [[1, 0]]}]},
])
def test_json_rejects(obj):
    with pytest.raises(ValueError):
        datum_from_json(obj)
