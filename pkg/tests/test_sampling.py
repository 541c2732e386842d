import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from offgrid_cs.sampling import (Degenerate, DeviationModelInapplicable, DiscreteUniform, Exponential,
                                 Laplace, Normal, NonuniformGrid, ThetaPreconditionWarning, UniformGeneral,
                                 UniformJitter, build_grid, char_function, distribution_from_record,
                                 draw_deviations, random_grid, theta, theta_j_max, theta_monte_carlo,
                                 uniform_grid, wrap)

ALL = [UniformJitter(0.3), UniformGeneral(0.01, 2), DiscreteUniform(0.0, 1, 40), Normal(0.0, 0.002),
       Laplace(0.0, 0.001), Exponential(300.0), Degenerate(0.01)]


def test_degenerate_draws():
    assert np.array_equal(draw_deviations(Degenerate(0.0), 5, 0), np.zeros(5))


def test_uniform_jitter_draws():
    m = 100_000
    d = draw_deviations(UniformJitter(0.5), m, 1)
    assert np.all(np.abs(d) <= 1 / (2 * m))
    sd = (1 / (2 * m)) / math.sqrt(3)
    assert abs(d.mean()) < 4 * sd / math.sqrt(m)


def test_normal_variance():
    d = draw_deviations(Normal(0.0, 0.01), 100_000, 2)
    assert abs(d.var() / 1e-4 - 1) < 0.05


def test_draws_deterministic():
    for dist in ALL:
        assert np.array_equal(draw_deviations(dist, 17, 5), draw_deviations(dist, 17, 5))


def test_build_grid_examples():
    g = build_grid(np.zeros(4))
    assert np.allclose(g.points, [-0.5, -0.25, 0.0, 0.25])
    g = build_grid(np.array([0.8, 0.0]))
    assert g.points[0] == pytest.approx(0.3)
    assert g.base_step == 0.5


@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40))
def test_grid_points_on_torus(devs):
    pts = build_grid(np.array(devs)).points
    assert np.all(pts >= -0.5) and np.all(pts < 0.5)


@given(st.lists(st.floats(-0.4, 0.4), min_size=1, max_size=20), st.integers(-5, 5))
def test_grid_integer_shift_invariance(devs, k):
    d = np.array(devs)
    a = build_grid(d).points
    b = build_grid(d + k).points
    dist = np.abs(wrap(a - b))
    assert np.all(dist < 1e-12)


def test_grid_text():
    g = uniform_grid(3)
    lines = g.to_text().strip().splitlines()
    assert len(lines) == 3 and lines[0].split()[0] == "1"


def test_char_function_examples():
    assert char_function(Degenerate(0.0), 12.3) == 1
    m = 36
    for j in (1, 2, 5):
        rho = 0.3
        assert char_function(UniformJitter(rho), j * m, m) == pytest.approx(
            math.sin(2 * math.pi * j * rho) / (2 * math.pi * j * rho), abs=1e-15)
        s = 0.003
        assert char_function(Normal(0.0, s), j * m) == pytest.approx(math.exp(-2 * (s * math.pi * j * m) ** 2))


@pytest.mark.parametrize("dist", ALL, ids=lambda d: d.kind)
def test_char_function_bounded(dist):
    t = np.linspace(-2000, 2000, 4001)
    assert np.all(np.abs(char_function(dist, t, 36)) <= 1 + 1e-12)


@pytest.mark.parametrize("make", [lambda mu: Normal(mu, 0.002), lambda mu: Laplace(mu, 0.001),
                                  lambda mu: UniformGeneral(mu, 3)])
def test_location_shift_modulus(make):
    a, b = make(0.0), make(0.3)
    t = np.linspace(-500, 500, 101)
    assert np.max(np.abs(np.abs(char_function(a, t, 36)) - np.abs(char_function(b, t, 36)))) < 1e-12


def test_exponential_modulus_envelope():
    lam = 500.0
    t = np.array([36.0, 72.0])
    assert np.allclose(np.abs(char_function(Exponential(lam), t)), lam / np.sqrt(lam**2 + (2 * np.pi * t) ** 2))


def test_theta_examples():
    N, m = 255, 36
    assert theta(UniformJitter(0.5), N, m) == 0.0
    b = 0.002
    assert theta(Laplace(0.0, b), N, m) == pytest.approx((2 * N / m) / (1 + (2 * math.pi * b * m) ** 2), rel=1e-12)
    assert theta(Degenerate(0.0), N, m) == pytest.approx(2 * N / m)
    s = 0.004
    assert theta(Normal(0.0, s), N, m) == pytest.approx((2 * N / m) * math.exp(-2 * (s * math.pi * m) ** 2))


@pytest.mark.parametrize("p", [1, 2, 36])
@pytest.mark.parametrize("mu", [0.0, 0.013])
def test_theta_uniform_general_zero(p, mu):
    assert theta(UniformGeneral(mu, p), 255, 36) == 0.0


def test_theta_jitter_matches_sinc_max():
    N, m, rho = 2015, 287, 0.2
    J = theta_j_max(N, m)
    assert J == 14
    ref = max(abs(math.sin(2 * math.pi * j * rho) / (2 * math.pi * j * rho)) for j in range(1, J + 1))
    assert theta(UniformJitter(rho), N, m) == pytest.approx(2 * N / m * ref, rel=1e-12)


def test_theta_oversampled_rejected():
    with pytest.raises(DeviationModelInapplicable):
        theta(UniformJitter(0.5), 63, 64)


def test_discrete_uniform_precondition_warns():
    with pytest.warns(ThetaPreconditionWarning):
        theta(DiscreteUniform(0.0, 1, 3), 255, 36)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert theta(DiscreteUniform(0.0, 1, 20), 255, 36) < 1e-12


def test_monte_carlo_examples():
    N, m = 255, 36
    deg = theta_monte_carlo(Degenerate(0.0), N, m, 10_000, 0)
    assert deg.value == pytest.approx(2 * N / m, rel=1e-12)
    est = theta_monte_carlo(UniformJitter(0.5), N, m, 100_000, 1)
    J = theta_j_max(N, m)
    assert est.value <= 3 * (2 * N / m) / math.sqrt(1e5) * math.sqrt(J)
    dist = Normal(0.0, 0.001)
    est = theta_monte_carlo(dist, 255, 64, 100_000, 2)
    assert abs(est.value - theta(dist, 255, 64)) <= 3 * est.stderr


def test_monte_carlo_clt_rate():
    dist = Normal(0.0, 0.003)
    exact = theta(dist, 255, 36)
    errs = [abs(theta_monte_carlo(dist, 255, 36, n, 7).value - exact) for n in (10_000, 100_000, 1_000_000)]
    assert errs[2] < errs[0]
    assert errs[2] < 3 * (2 * 255 / 36) * math.sqrt(1 / 1e6) * 2


def test_records_round_trip():
    for dist in ALL:
        assert distribution_from_record(dist.to_record()) == dist
    assert distribution_from_record({"kind": "normal", "sigma_bar": 0.1}) == Normal(0.0, 0.1)
    with pytest.raises(ValueError):
        distribution_from_record({"kind": "uniform_jitter", "rh": 0.5})
    with pytest.raises(ValueError):
        Normal(0.0, -1.0)


def test_random_grid_reproducible():
    a = random_grid(UniformJitter(0.5), 20, 9)
    b = random_grid(UniformJitter(0.5), 20, 9)
    assert isinstance(a, NonuniformGrid) and np.array_equal(a.points, b.points)
