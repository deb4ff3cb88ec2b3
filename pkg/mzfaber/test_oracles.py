import math

import numpy as np
import pytest
import scipy.special
from numpy.testing import assert_allclose

from mzfaber import config, models, oracles
from mzfaber.errors import DimensionError, ProjectionError
from mzfaber.matrix_core import poly_apply
from mzfaber.mz_kernels import StatsKind, SystemSpec, reduce


class GaussianSampler:
    def __init__(self, dim):
        self.dim = dim

    def sample(self, n_samples, rng):
        return rng.standard_normal((self.dim, n_samples))


def _random_system(n, seed):
    rng = np.random.default_rng(seed)
    return SystemSpec(rng.standard_normal((n, n)) / math.sqrt(n), rng.standard_normal(n))


@pytest.mark.parametrize("kind", list(StatsKind))
def test_projection_is_idempotent_and_complementary(kind):
    chain = models.build_chain_system(models.build_path(3))
    system = SystemSpec(chain.A, np.arange(6.0), kind)
    rep = oracles.AffineObservableRep.from_system(system, 2)
    P = oracles.operator_oracle(system, "P", 2)
    Q = oracles.operator_oracle(system, "Q", 2)
    assert_allclose(P @ P, P, atol=1e-12)
    assert_allclose(P + Q, np.eye(rep.dim), atol=1e-12)
    assert_allclose(rep.L_rep[1:, 1:], system.A.T)


def test_projection_keeps_resolved_observable():
    system = _random_system(5, 0)
    rep = oracles.AffineObservableRep.from_system(system, 4)
    assert_allclose(oracles.apply_word(system, "P", 4), rep.observable())


def test_berne_projection_drops_constants():
    system = models.build_chain_system(models.build_path(3))
    P = oracles.operator_oracle(system, "P", 1)
    assert P[0, 0] == 0.0
    assert_allclose(P @ np.r_[3.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0], np.r_[0.0, 1.0, 0, 0, 0, 0, 0])


def test_orthogonal_step_identity():
    system = _random_system(5, 1)
    r = reduce(system, 1)
    coords = oracles.apply_word(system, "QL", 1)
    assert coords[0] == pytest.approx(-r.avec @ r.mean_rest, abs=1e-12)
    assert coords[1] == pytest.approx(0.0, abs=1e-12)
    assert_allclose(coords[2:], r.avec, atol=1e-12)


def test_unknown_symbol_rejected():
    with pytest.raises(DimensionError):
        oracles.operator_oracle(_random_system(3, 0), "PX")


def test_polynomial_memory_formulas_on_random_systems():
    rng = np.random.default_rng(77)
    for trial in range(20):
        n = int(rng.integers(2, 11))
        system = _random_system(n, 100 + trial)
        index = int(rng.integers(1, n + 1))
        degree = int(rng.integers(0, 7))
        coeffs = rng.standard_normal(degree + 1)
        r = reduce(system, index)

        combined = sum(c * oracles.apply_word(system, "PL" + "QL" * j + "QL", index) for j, c in enumerate(coeffs))
        m = r.generator
        g = r.bvec @ poly_apply(m, coeffs, r.avec)
        f = poly_apply(m, coeffs, m @ r.avec) @ r.mean_rest
        scale = max(1.0, abs(g), abs(f))
        assert combined[index] == pytest.approx(g, abs=1e-10 * scale)
        assert combined[0] == pytest.approx(f, abs=1e-10 * scale)


def test_vacf_analytic_values():
    assert oracles.vacf_analytic_l2(0.0) == 1.0
    assert oracles.vacf_analytic_l2(1.0) == pytest.approx(0.1898950593, abs=1e-9)
    assert oracles.vacf_analytic_l2(1.0) == pytest.approx(
        oracles.bessel_series(0, 2.0) - oracles.bessel_series(4, 2.0), abs=1e-14
    )
    values = oracles.vacf_analytic_l2(np.linspace(0.0, 50.0, 5001))
    assert np.max(np.abs(values)) <= 1.0
    with pytest.raises(DimensionError):
        oracles.vacf_analytic_l2(-1.0)


def test_vacf_matrix_exp_single_oscillator():
    system = SystemSpec(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros(2), StatsKind.BERNE_EQUILIBRIUM_QUADRATIC)
    grid = np.linspace(0.0, 10.0, 101)
    traj = oracles.vacf_matrix_exp(system, 1, grid)
    assert traj.values[0] == 1.0
    assert_allclose(traj.values, np.cos(grid), atol=1e-12)


def test_vacf_matrix_exp_rejects_bad_input():
    with pytest.raises(ProjectionError):
        oracles.vacf_matrix_exp(_random_system(4, 0), 1, [0.0, 1.0])
    chain = models.build_chain_system(models.build_path(3))
    with pytest.raises(ProjectionError):
        oracles.vacf_matrix_exp(chain, 4, [0.0, 1.0])


def test_vacf_interior_chain_matches_bessel_solution():
    system = models.build_chain_system(models.fix_endpoints(models.build_path(102)))
    grid = np.linspace(0.0, 10.0, 1001)
    traj = oracles.vacf_matrix_exp(system, 1, grid)
    assert traj.values[0] == 1.0
    assert np.max(np.abs(traj.values - oracles.vacf_analytic_l2(grid))) < 5e-3


def test_vacf_non_uniform_grid():
    system = models.build_chain_system(models.fix_endpoints(models.build_path(8)))
    grid = np.array([0.0, 0.3, 1.7, 2.0])
    uniform = oracles.vacf_matrix_exp(system, 2, np.linspace(0.0, 2.0, 21))
    assert_allclose(oracles.vacf_matrix_exp(system, 2, grid).values[[0, 3]], uniform.values[[0, 20]], atol=1e-12)


def test_mean_matrix_exp_scalar_decay():
    system = SystemSpec(np.array([[-1.0]]), np.array([2.0]))
    grid = np.linspace(0.0, 3.0, 31)
    assert_allclose(oracles.mean_matrix_exp(system, 1, grid).values, 2.0 * np.exp(-grid), rtol=1e-12)


def test_mc_mean_of_deterministic_state():
    system = _random_system(4, 5)
    grid = np.linspace(0.0, 2.0, 21)
    sampler = models.DiracSampler(system.init_mean)
    traj = oracles.mc_mean(system, sampler, 3, grid, n_samples=40, seed=1)
    exact = oracles.mean_matrix_exp(system, 3, grid)
    assert_allclose(traj.values, exact.values, rtol=1e-12, atol=1e-12)
    assert np.max(traj.stderr) < 1e-6


def test_mc_mean_of_zero_mean_gaussian():
    system = SystemSpec(-0.3 * np.eye(3) + np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]), np.zeros(3))
    grid = np.linspace(0.0, 2.0, 3)
    traj = oracles.mc_mean(system, GaussianSampler(3), 1, grid, n_samples=4000, seed=11)
    assert np.all(np.abs(traj.values) < 4.0 * traj.stderr)
    # e_1^T e^{tA} tem norma e^{-0.3 t}, então o desvio padrão é e^{-0.3 t}
    assert_allclose(traj.stderr, np.exp(-0.3 * grid) / math.sqrt(4000), rtol=0.1)


def test_mc_mean_reproducible_across_worker_counts(monkeypatch):
    system = _random_system(3, 2)
    grid = np.linspace(0.0, 1.0, 11)
    first = oracles.mc_mean(system, GaussianSampler(3), 1, grid, n_samples=100, seed=3)
    monkeypatch.setattr(config, 'MAX_WORKERS', 1)
    second = oracles.mc_mean(system, GaussianSampler(3), 1, grid, n_samples=100, seed=3)
    assert np.array_equal(first.values, second.values)
    other = oracles.mc_mean(system, GaussianSampler(3), 1, grid, n_samples=100, seed=4)
    assert not np.array_equal(first.values, other.values)


def test_mc_mean_needs_samples():
    system = _random_system(3, 2)
    with pytest.raises(DimensionError):
        oracles.mc_mean(system, GaussianSampler(3), 1, [0.0, 1.0], n_samples=0, seed=0)


def test_mc_autocorrelation_matches_matrix_exponential():
    system = models.build_chain_system(models.fix_endpoints(models.build_path(8)))
    grid = np.linspace(0.0, 4.0, 41)
    exact = oracles.vacf_matrix_exp(system, 2, grid)
    mc = oracles.mc_autocorrelation(system, 2, grid, n_samples=50000, seed=8)
    assert mc.values[0] == pytest.approx(1.0)
    assert np.max(np.abs(mc.values - exact.values)) < 0.05


def test_iterated_integral_matches_cauchy_form():
    for phi in (np.cos, lambda s: np.exp(-s), lambda s: s * s):
        for n in (1, 2, 3):
            a = oracles.iterated_integral(phi, 1.5, n)
            b = oracles.cauchy_integral(phi, 1.5, n)
            assert a == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_iterated_integral_of_constant():
    for n in (1, 2, 3):
        assert oracles.iterated_integral(lambda s: 1.0, 2.0, n) == pytest.approx(2.0 ** n / math.factorial(n))
    with pytest.raises(DimensionError):
        oracles.cauchy_integral(np.cos, 1.0, 0)


@pytest.mark.parametrize("j, x", [(0, 0.5), (1, 2.0), (4, 2.0), (7, 3.3), (2, 10.0), (1, -1.0)])
def test_bessel_series_matches_scipy(j, x):
    assert oracles.bessel_series(j, x) == pytest.approx(scipy.special.jv(j, x), abs=1e-13)


def test_bessel_series_at_origin():
    assert oracles.bessel_series(0, 0.0) == 1.0
    assert oracles.bessel_series(3, 0.0) == 0.0


def test_normalized_chain_matches_scaled_bessel_solution():
    system = models.build_chain_system(models.fix_endpoints(models.build_path(102)), l_norm=2)
    grid = np.linspace(0.0, 10.0, 1001)
    traj = oracles.vacf_matrix_exp(system, 1, grid)
    assert np.max(np.abs(traj.values - oracles.vacf_analytic_l2(grid, np.sqrt(0.5)))) < 5e-3
