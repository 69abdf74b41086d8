import math
import threading

import numpy as np
import pytest

from borel_stokes import HEAT, CauchyDatum, Equation
from borel_stokes.errors import GrowthOrderViolation, NoMinimum
from borel_stokes.formal import (formal_solution, gevrey_estimate, optimal_truncation,
                                 partial_sum)

Q3 = Equation(1, 3)


def test_equation_invariants():
    eq = Equation(2, 5)
    assert eq.k == pytest.approx(2 / 3) and eq.s == pytest.approx(3 / 2)
    assert eq.alpha == pytest.approx(2.5)
    assert 1 / eq.alpha + 1 / eq.beta == 1
    assert eq.period == pytest.approx(5 * math.pi)
    assert HEAT.half_opening == pytest.approx(math.pi / 2)
    for bad in [(0, 2), (2, 2), (3, 1)]:
        with pytest.raises(ValueError):
            Equation(*bad)
    with pytest.raises(TypeError):
        Equation(1.5, 3)


def test_terminating_heat_square():
    f = formal_solution(HEAT, CauchyDatum.from_parts(entire=[(1.0, 0.0, 2)]))
    assert f.terminates_at == 1
    assert f.coefficient(1).entire.terms == ((2, 0, 0),)
    assert f.coefficient(2).entire.terms == ()
    for t in (0.1, 0.5 + 0.2j):
        assert partial_sum(f, t, 1.0, 5) == pytest.approx(1 + 2 * t)


def test_terminating_q3_cube():
    f = formal_solution(Q3, CauchyDatum.from_parts(entire=[(1.0, 0.0, 3)]))
    assert partial_sum(f, 0.5, 0.0, 3) == pytest.approx(3.0)
    assert partial_sum(f, 0.5, 1.0, 3) == pytest.approx(4.0)


def test_exponential_coefficients():
    f = formal_solution(HEAT, CauchyDatum.from_parts(entire=[(1.0, 1.0, 0)]))
    for n in range(8):
        assert f.coefficient_value(n, 0.0) == pytest.approx(1 / math.factorial(n), rel=1e-13)
    assert partial_sum(f, 0.25, 0.0, 20) == pytest.approx(math.exp(0.25), rel=1e-14)


def test_partial_sum_at_t_zero():
    d = CauchyDatum.from_parts([(1.0, [1.0])], [(1.0, 1.0, 1)])
    f = formal_solution(HEAT, d)
    assert partial_sum(f, 0.0, 0.3, 10) == pytest.approx(d.eval(0.3))


def test_pole_coefficients_exact():
    # phi^{(2n)}(0)/n! = -(2n)!/n! for phi = 1/(z - 1)
    f = formal_solution(HEAT, CauchyDatum.simple_pole(1.0))
    for n in range(1, 15):
        exact = -math.factorial(2 * n) / math.factorial(n)
        assert f.coefficient_value(n, 0.0) == pytest.approx(exact, rel=1e-12)


def test_coefficient_recurrence_structural():
    rng = np.random.default_rng(5)
    for eq in (HEAT, Q3, Equation(2, 3)):
        d = CauchyDatum.from_parts([(complex(*rng.uniform(-2, 2, 2)), [1.0, 0.5])],
                                   [(1.0, 0.5j, 1)])
        f = formal_solution(eq, d)
        for n in range(6):
            ratio = math.factorial(eq.p * (n + 1)) / math.factorial(eq.p * n)
            lhs = f.coefficient(n + 1)
            rhs = f.coefficient(n).derivative(eq.q)
            for a, b in zip(lhs.poles, rhs.poles):
                assert np.allclose(np.array(a.coefficients) * ratio, b.coefficients, rtol=1e-12)


def test_partial_sum_linear():
    a = CauchyDatum.simple_pole(1.0)
    b = CauchyDatum.from_parts([(2j, [1.0, 1.0])], [(1.0, 1.0, 0)])
    c = a + (2 - 1j) * b
    t, z = 0.01 + 0.005j, 0.1
    lhs = partial_sum(formal_solution(HEAT, c), t, z, 6)
    rhs = (partial_sum(formal_solution(HEAT, a), t, z, 6)
           + (2 - 1j) * partial_sum(formal_solution(HEAT, b), t, z, 6))
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_growth_order_violation():
    # growth order 1 is fine for every p < q since q/(q-p) > 1; the check
    # is exercised through a stubbed order
    d = CauchyDatum.from_parts(entire=[(1.0, 1.0, 0)])
    formal_solution(Equation(1, 2), d)

    class Steep:
        order = 3
    fake = CauchyDatum.from_parts(entire=[(1.0, 1.0, 0)])
    object.__setattr__(fake, "entire", Steep())
    with pytest.raises(GrowthOrderViolation):
        formal_solution(HEAT, fake)


def test_gevrey_estimates():
    assert abs(gevrey_estimate(formal_solution(HEAT, CauchyDatum.simple_pole(1.0)), 0.0, 60) - 1) < 0.15
    assert abs(gevrey_estimate(formal_solution(Q3, CauchyDatum.simple_pole(1.0)), 0.0, 60) - 2) < 0.25
    assert gevrey_estimate(formal_solution(HEAT, CauchyDatum.from_parts(entire=[(1.0, 0.0, 5)])),
                           0.3, 20) == 0.0
    with pytest.raises(ValueError):
        gevrey_estimate(formal_solution(HEAT, CauchyDatum.simple_pole(1.0)), 0.0, 7)


def test_optimal_truncation_terminating():
    f = formal_solution(HEAT, CauchyDatum.from_parts(entire=[(1.0, 0.0, 2)]))
    n, v, e = optimal_truncation(f, 0.3, 1.0)
    assert (n, e) == (1, 0.0) and v == pytest.approx(1.6)


def test_optimal_truncation_small_t():
    f = formal_solution(HEAT, CauchyDatum.simple_pole(1.0))
    n, v, e = optimal_truncation(f, 0.01, 0.0)
    assert e < 1e-8
    assert 10 < n < 40


def test_optimal_truncation_no_minimum():
    with pytest.raises(NoMinimum):
        optimal_truncation(formal_solution(HEAT, CauchyDatum.simple_pole(1.0)), 10.0, 0.0)


def test_concurrent_extension_is_consistent():
    f = formal_solution(HEAT, CauchyDatum.from_parts([(1.0, [1.0, 1.0])], [(1.0, 1.0, 2)]))
    out = {}

    def work(i):
        out[i] = [f.coefficient(n).poles[0].coefficients for n in range(0, 40, 3)]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    ref = [formal_solution(HEAT, f.datum).coefficient(n).poles[0].coefficients for n in range(0, 40, 3)]
    assert all(v == ref for v in out.values())
    assert len(f._coeffs) == 40
