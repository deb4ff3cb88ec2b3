"""Experimentos de referência de ponta a ponta: cadeias harmônicas e ondas no anel."""

import math

import numpy as np
import pytest

from mzfaber import models, oracles
from mzfaber.errors import MZFaberError
from mzfaber.gle_solver import SolverConfig, solve_gle
from mzfaber.models import WaveModelSpec
from mzfaber.mz_kernels import Family, ReducedModel, exact_kernel, expand, kernel_table, reduce


def _max_error(reduced, family, order, y0, reference, cfg):
    """Erro máximo da GLE contra a referência; divergência conta como erro infinito."""
    with np.errstate(all='ignore'):
        try:
            model = ReducedModel.from_reduced(reduced, expand(reduced, family, order))
            traj = solve_gle(model, y0, cfg)
        except MZFaberError:
            return math.inf
    error = float(np.max(np.abs(traj.values - reference)))
    return error if math.isfinite(error) else math.inf


@pytest.fixture(scope='module')
def chain_l2():
    system = models.build_chain_system(models.fix_endpoints(models.build_path(102)), l_norm=2)
    cfg = SolverConfig(dt=1e-3, t_final=10.0)
    reference = oracles.vacf_matrix_exp(system, 1, cfg.times).values
    return system, reduce(system, 1), cfg, reference


@pytest.fixture(scope='module')
def chain_l2_errors(chain_l2):
    _, reduced, cfg, reference = chain_l2
    return {
        (family, n): _max_error(reduced, family, n, 1.0, reference, cfg)
        for family in (Family.DYSON, Family.FABER)
        for n in (6, 10, 14, 18, 20)
    }


def test_chain_l2_faber_kernel_converges(chain_l2):
    _, reduced, _, _ = chain_l2
    times = np.linspace(0.0, 5.0, 101)
    g, _ = kernel_table(expand(reduced, Family.FABER, 20), times)
    exact_g, exact_f = exact_kernel(reduced, times)
    assert np.max(np.abs(g - exact_g)) < 1e-3
    assert np.max(np.abs(exact_f)) == 0.0


def test_chain_l2_faber_order_improves_tenfold(chain_l2_errors):
    assert chain_l2_errors[(Family.FABER, 18)] * 10.0 <= chain_l2_errors[(Family.FABER, 6)]
    assert chain_l2_errors[(Family.FABER, 20)] < 5e-2


def test_chain_l2_faber_matches_bessel_solution(chain_l2):
    _, reduced, cfg, _ = chain_l2
    model = ReducedModel.from_reduced(reduced, expand(reduced, Family.FABER, 20))
    traj = solve_gle(model, 1.0, cfg)
    assert np.max(np.abs(traj.values - oracles.vacf_analytic_l2(traj.times, np.sqrt(0.5)))) < 1e-2


@pytest.mark.parametrize("n", [6, 10, 14, 18])
def test_chain_l2_faber_beats_dyson(chain_l2_errors, n):
    assert chain_l2_errors[(Family.FABER, n)] <= chain_l2_errors[(Family.DYSON, n)]


def test_chain_l2_faber_error_decays_superlinearly(chain_l2_errors):
    err = [chain_l2_errors[(Family.FABER, n)] for n in (6, 10, 14, 18)]
    assert err[0] > err[1] > err[2] > err[3]
    ratios = [b / a for a, b in zip(err, err[1:])]
    assert ratios[0] > ratios[1] > ratios[2]


@pytest.fixture(scope='module')
def bethe_l3():
    system = models.build_chain_system(models.build_bethe(3, 8), l_norm=3)
    assert system.dim == 2 * 766
    cfg = SolverConfig(dt=1e-2, t_final=10.0)
    reference = oracles.vacf_matrix_exp(system, 1, cfg.times).values
    return reduce(system, 1), cfg, reference


def test_bethe_l3_center_oscillator(bethe_l3):
    reduced, cfg, reference = bethe_l3
    errors = [_max_error(reduced, Family.FABER, n, 1.0, reference, cfg) for n in (8, 14, 20)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 5e-2


@pytest.fixture(scope='module')
def wave():
    spec = WaveModelSpec(n_radial=4, n_angular=3, n_random_modes=12, mode_mean=1.0)
    system, sampler, sensor = models.build_wave_model(spec)
    return system, sampler, sensor.index


def test_wave_mean_from_gle(wave):
    system, _, index = wave
    cfg = SolverConfig(dt=1e-3, t_final=5.0)
    exact = oracles.mean_matrix_exp(system, index, cfg.times).values
    reduced = reduce(system, index)
    error = _max_error(reduced, Family.FABER, 20, system.init_mean[index - 1], exact, cfg)
    assert error < 5e-2


def test_wave_monte_carlo_mean(wave):
    system, sampler, index = wave
    grid = np.linspace(0.0, 5.0, 6)
    exact = oracles.mean_matrix_exp(system, index, grid)
    mc = oracles.mc_mean(system, sampler, index, grid, n_samples=10000, seed=2024)
    assert np.all(np.abs(mc.values - exact.values) < 3.0 * mc.stderr)
