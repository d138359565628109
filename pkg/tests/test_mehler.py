import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import trapezoid
from hypothesis import strategies as st

import oracles
from heisenspec import mehler
from heisenspec.errors import DivergentIntegral, InvalidArgument, ToleranceNotMet
from heisenspec.group import Point
from heisenspec.mehler import HeatQuery, heat_kernel, nu


def test_oracle_self_check():
    # the mpmath oracle reproduces the classical integrals it is meant to replace
    assert oracles.nu_mp(1, 0) == pytest.approx(1 / 16, rel=1e-14)
    assert oracles.nu_mp(2, 0) == pytest.approx(1 / (144 * math.pi), rel=1e-14)


def test_nu_n1_closed_form():
    assert nu(1, 0.0) == pytest.approx(0.0625, rel=1e-10)


def test_nu_n2_closed_form():
    assert nu(2, 0.0) == pytest.approx(1 / (144 * math.pi), rel=1e-9)


@pytest.mark.parametrize("mu", [0.1, 0.5, 0.9, -0.75])
def test_nu_n1_secant_formula(mu):
    # int e^{-mu x} x / sinh x dx = (pi^2/2) sec^2(pi mu / 2)
    expect = (2 * math.pi) ** -2 / 2 * (math.pi ** 2 / 2) / math.cos(math.pi * mu / 2) ** 2
    assert nu(1, mu) == pytest.approx(expect, rel=1e-10)


@pytest.mark.parametrize("n,mu", [(2, 1.3), (3, 0.0), (3, 2.5), (4, -3.1)])
def test_nu_matches_mpmath(n, mu):
    assert nu(n, mu) == pytest.approx(oracles.nu_mp(n, mu), rel=1e-10)


@settings(max_examples=40)
@given(st.integers(1, 3), st.floats(0, 0.98))
def test_nu_even(n, frac):
    mu = frac * n
    assert nu(n, mu) == pytest.approx(nu(n, -mu), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_nu_positive_and_monotone(n):
    grid = np.linspace(0, n - 0.1, 12)
    vals = [nu(n, m, 1e-9) for m in grid]
    assert all(v > 0 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_nu_blows_up_at_edge(n):
    v = [nu(n, n - e) for e in (1e-1, 1e-2, 1e-3)]
    assert v[0] < v[1] < v[2]
    assert v[2] * 1e-3 > 0.5 * v[1] * 1e-2  # grows at least like 1/eps


@pytest.mark.parametrize("mu", [1.0, -1.0, 2.5])
def test_nu_divergent(mu):
    with pytest.raises(DivergentIntegral):
        nu(1, mu)


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_nu_bad_order(n):
    with pytest.raises(InvalidArgument):
        nu(n, 0.0)


def test_nu_full_output_error_bound():
    v = nu(1, 0.0, full_output=True)
    assert 0 <= v.est_error <= 1e-10 * v.value


def test_heat_kernel_origin():
    kv = heat_kernel(HeatQuery(1, 0.0, 0.0, 0.0, 1.0))
    assert kv.value == pytest.approx(0.125, rel=1e-8)
    assert isinstance(kv.value, float)
    assert kv.est_error <= 1e-8 * kv.value


@pytest.mark.parametrize("n,mu", [(1, 0.3), (2, -1.2), (3, 2.0), (2, 0.0)])
def test_heat_kernel_nu_agreement(n, mu):
    k = heat_kernel(HeatQuery(n, mu, 0.0, 0.0, 1.0, 1e-11)).value
    assert k / math.factorial(n + 1) == pytest.approx(nu(n, mu), rel=1e-9)


def test_heat_kernel_n1_closed_form_in_x0():
    # FT of x/sinh x is (pi^2/2) sech^2(pi a / 2)
    for x0 in (0.3, 1.0, 2.0):
        t = 0.8
        expect = (2 * math.pi * t) ** -2 * (math.pi ** 2 / 2) / math.cosh(math.pi * x0 / t / 2) ** 2
        assert heat_kernel(HeatQuery(1, 0.0, x0, 0.0, t)).value == pytest.approx(expect, rel=1e-8)


@pytest.mark.parametrize("n,mu,x0,r2,t", [(1, 0.4, 0.3, 0.5, 0.7), (2, -1.1, -0.6, 1.3, 1.4), (1, 0.0, 0.2, 2.0, 0.5)])
def test_heat_kernel_matches_mpmath(n, mu, x0, r2, t):
    got = heat_kernel(HeatQuery(n, mu, x0, r2, t)).value
    ref = oracles.kernel_mp(n, mu, x0, r2, t)
    assert abs(complex(got) - ref) <= 1e-8 * abs(ref)


def test_heat_kernel_complex_off_axis():
    v = heat_kernel(HeatQuery(1, 0.4, 0.3, 0.5, 0.7)).value
    assert isinstance(v, complex) and abs(v.imag) > 1e-3 * abs(v.real)


@pytest.mark.parametrize("n,mu,x0,r2", [(1, 0.0, 0.7, 0.4), (2, 1.5, 0.0, 0.9)])
def test_heat_kernel_real_cases(n, mu, x0, r2):
    v = heat_kernel(HeatQuery(n, mu, x0, r2, 0.9)).value
    assert isinstance(v, float)


@pytest.mark.parametrize("n,mu,x0,r2,t", [(1, 0.3, 0.2, 0.3, 0.5), (2, 0.0, -0.4, 1.0, 0.3), (3, 1.0, 0.1, 0.2, 0.25)])
def test_parabolic_scaling(n, mu, x0, r2, t):
    lam = 2.0
    a = heat_kernel(HeatQuery(n, mu, lam ** 2 * x0, lam ** 2 * r2, lam ** 2 * t)).value
    b = heat_kernel(HeatQuery(n, mu, x0, r2, t)).value
    assert abs(complex(a) - lam ** (-(2 * n + 2)) * complex(b)) <= 1e-8 * abs(a)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_heat_kernel_rejects_nonpositive_t(t):
    with pytest.raises(InvalidArgument):
        HeatQuery(1, 0.0, 0.0, 0.0, t)


def test_heat_kernel_rejects_negative_r2_and_divergent_mu():
    with pytest.raises(InvalidArgument):
        HeatQuery(1, 0.0, 0.0, -1.0, 1.0)
    with pytest.raises(DivergentIntegral):
        HeatQuery(2, 2.0, 0.0, 0.0, 1.0)


def test_heat_kernel_oscillation_limit():
    with pytest.raises(ToleranceNotMet):
        heat_kernel(HeatQuery(1, 0.0, 2e4, 0.0, 1.0))


def test_heat_kernel_unresolvable_magnitude():
    # the value is ~e^{-15} of the integrand scale: relative accuracy unattainable
    with pytest.raises(ToleranceNotMet):
        heat_kernel(HeatQuery(1, 0.0, 10.0, 0.0, 1.0))


def test_fiber_mehler_at_zero():
    for n, r2, t in [(1, 0.3, 0.5), (3, 2.0, 1.7)]:
        assert mehler.fiber_mehler(n, 0.0, r2, t) == pytest.approx(
            (2 * math.pi * t) ** (-n) * math.exp(-r2 / (2 * t)), rel=1e-15)


def test_fiber_mehler_decay_bound():
    # at r2 = 0: |h| = pi^{-n} |xi|^n e^{-t n |xi|} / (1 - e^{-2 t |xi|})^n, so the printed
    # bound holds up to the factor (1 - e^{-2t|xi|})^{-n} and is sharp as |xi| grows
    xi = np.array([0.5, 1.0, 5.0, 20.0, 80.0])
    for n, t in [(1, 0.5), (2, 1.0), (3, 0.2)]:
        h = mehler.fiber_mehler(n, xi, 0.0, t)
        bound = math.pi ** (-n) * xi ** n * np.exp(-t * n * xi)
        assert np.all(h * (1 - np.exp(-2 * t * xi)) ** n <= bound * (1 + 1e-12))
        assert h[-1] / bound[-1] == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("mu,x0,r2,t", [(0.0, 0.3, 0.4, 0.6), (0.5, -0.2, 0.1, 0.9)])
def test_fiber_mehler_fourier_reproduces_kernel(mu, x0, r2, t):
    # k(x0) = (1/2pi) int e^{i x0 xi0} e^{-mu xi0 t} h(xi0) dxi0, by a fine trapezoid rule
    xi0 = np.linspace(-200, 200, 400001)
    h = mehler.fiber_mehler(1, xi0, r2, t) * np.exp(-mu * xi0 * t)
    vals = np.exp(1j * x0 * xi0) * h
    k = trapezoid(vals, xi0) / (2 * math.pi)
    ref = complex(heat_kernel(HeatQuery(1, mu, x0, r2, t)).value)
    assert abs(k - ref) <= 1e-8 * abs(ref)


def _orders(n, mu, p, t, kernel_mu=None):
    hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    res = [mehler.heat_residual(n, mu, p, t, h, kernel_mu) for h in hs]
    return res, [math.log2(a / b) for a, b in zip(res, res[1:])]


@pytest.mark.parametrize("mu", [0.0, 0.5])
def test_residual_second_order(mu):
    res, orders = _orders(1, mu, Point(0.3, [0.4, 0.1]), 0.7)
    assert min(orders) > 1.8
    assert res[-1] < 1e-5


def test_residual_negative_control():
    p = Point(0.3, [0.4, 0.1])
    good = mehler.heat_residual(1, 0.0, p, 0.7, 1.25e-3)
    bad = [mehler.heat_residual(1, 0.0, p, 0.7, h, kernel_mu=0.3) for h in (1e-2, 1.25e-3)]
    assert bad[1] > 100 * good
    assert bad[1] == pytest.approx(bad[0], rel=0.05)


def test_residual_n2():
    res, orders = _orders(2, 0.7, Point(0.2, [0.3, -0.1, 0.2, 0.4]), 0.9)
    assert min(orders) > 1.8


def test_total_mass_is_one():
    for t in (0.25, 1.0):
        kv = mehler.total_mass(1, t)
        assert kv.value == pytest.approx(1.0, abs=1e-6)
        assert kv.est_error < 1e-6


def test_total_mass_n2():
    assert mehler.total_mass(2, 0.5).value == pytest.approx(1.0, abs=1e-6)


def test_total_mass_small_box():
    kv = mehler.total_mass(1, 1.0, trunc=2.0)
    assert kv.value < 1.0
    assert kv.value + kv.est_error >= 1.0
