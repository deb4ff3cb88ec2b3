import json
import os

import numpy as np
import pytest

from mzfaber import cli, config, oracles, reports
from mzfaber.errors import ConfigError, EllipseMapError, GridMismatchError
from mzfaber.mz_kernels import StatsKind

CHAIN = """\
[experiment]
name = chain_small
model = chain_bethe
families = dyson, faber, lagrange
orders = 4, 8
oracle = matrix_exp
output_dir = {output_dir}

[model]
l = 2
n_nodes = 20

[solver]
dt = 0.01
t_final = 2.0
output_dt = 0.1
"""

ER = """\
[experiment]
model = chain_er
families = faber
orders = 6
seed = {seed}
output_dir = er_{seed}

[model]
n = 12
p = 0.5

[solver]
dt = 0.01
t_final = 1.0
output_dt = 0.1
"""


@pytest.fixture(autouse=True)
def output_root(tmp_path, monkeypatch):
    root = tmp_path / 'runs'
    monkeypatch.setattr(config, 'OUTPUT_ROOT', str(root))
    return root


def _write(tmp_path, text, name='experiment.ini'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


def _chain(tmp_path, output_dir='chain_small'):
    return cli.load_config(_write(tmp_path, CHAIN.format(output_dir=output_dir), f'{output_dir}.ini'))


def test_load_config_reads_experiment(tmp_path):
    cfg = _chain(tmp_path)
    assert cfg.model == 'chain_bethe'
    assert cfg.projection is StatsKind.BERNE_EQUILIBRIUM_QUADRATIC
    assert cfg.families == ('dyson', 'faber', 'lagrange')
    assert cfg.orders == (4, 8)
    assert cfg.stride == 10
    assert cfg.runs() == [('dyson', 4), ('dyson', 8), ('faber', 4), ('faber', 8), ('lagrange', None)]
    assert len(cfg.output_grid) == 21


def test_empty_families_rejected(tmp_path):
    text = CHAIN.format(output_dir='x').replace('families = dyson, faber, lagrange', 'families =')
    with pytest.raises(ConfigError) as info:
        cli.load_config(_write(tmp_path, text))
    assert info.value.line == 4
    assert cli.main(['run', _write(tmp_path, text)]) == cli.EXIT_CONFIG


def test_config_error_names_the_line(tmp_path):
    text = CHAIN.format(output_dir='x').replace('model = chain_bethe', 'model = banana')
    with pytest.raises(ConfigError) as info:
        cli.load_config(_write(tmp_path, text))
    assert info.value.line == 3
    assert str(info.value).startswith('linha 3:')


@pytest.mark.parametrize("old, new", [
    ('orders = 4, 8', 'orders = 8, 4'),
    ('orders = 4, 8', 'orders = 0, 4'),
    ('l = 2', 'l = dois'),
    ('n_nodes = 20', 'n_nodes = 20\nshels = 3'),
    ('output_dt = 0.1', 'output_dt = 0.015'),
    ('oracle = matrix_exp', 'oracle = monte_carlo'),
])
def test_invalid_configs(tmp_path, old, new):
    text = CHAIN.format(output_dir='x').replace(old, new)
    with pytest.raises(ConfigError):
        cli.load_config(_write(tmp_path, text))


def test_berne_projection_needs_chain(tmp_path):
    text = ("[experiment]\nmodel = wave_annulus\nprojection = berne\nfamilies = faber\norders = 4\nseed = 1\n"
            "[model]\nn_radial = 3\nn_angular = 3\n")
    with pytest.raises(ConfigError) as info:
        cli.load_config(_write(tmp_path, text))
    assert info.value.line == 3


def test_missing_config_file(tmp_path):
    assert cli.main(['run', str(tmp_path / 'nada.ini')]) == cli.EXIT_CONFIG


def test_bad_arguments_exit_as_config_error():
    assert cli.main(['voar']) == cli.EXIT_CONFIG


def test_run_writes_report(tmp_path, output_root):
    assert cli.main(['run', _write(tmp_path, CHAIN.format(output_dir='chain_small'))]) == cli.EXIT_OK
    out = output_root / 'chain_small'
    summary = reports.load_json(out / 'summary.json')
    assert summary['experiment'] == 'chain_small'
    assert summary['reduced']['dim'] == 40
    assert [run['tag'] for run in summary['runs']] == ['dyson_n4', 'dyson_n8', 'faber_n4', 'faber_n8', 'lagrange']
    assert all(run['status'] == 'ok' for run in summary['runs'])
    assert summary['runs'][-1]['order'] == 38
    for run in summary['runs']:
        for name in run['files'].values():
            assert (out / name).exists()
        assert os.path.exists(out / f"{run['tag']}_kernel.json")
    assert reports.load_json(out / 'faber_n8_kernel.json')['ellipse']['c1'] <= 0.0


def test_summary_metrics_recomputable_from_csv(tmp_path, output_root):
    cli.run(_chain(tmp_path))
    out = output_root / 'chain_small'
    summary = reports.load_json(out / 'summary.json')
    reference = reports.load_trajectory_csv(out / 'reference.csv')
    for run in summary['runs']:
        traj = reports.load_trajectory_csv(out / run['files']['trajectory'])
        max_error, l2_error = cli.error_metrics(traj.values, reference.values, summary['solver']['output_dt'])
        assert max_error == pytest.approx(run['max_error'], rel=1e-15, abs=1e-15)
        assert l2_error == pytest.approx(run['l2_error'], rel=1e-15, abs=1e-15)
        errors = reports.load_error_csv(out / run['files']['error'])
        assert np.max(np.abs(errors['error'])) == pytest.approx(run['max_error'], rel=1e-15, abs=1e-15)


def test_lagrange_run_matches_reference(tmp_path, output_root):
    summary = cli.run(_chain(tmp_path))
    lagrange = summary['runs'][-1]
    assert lagrange['max_error'] < 1e-3


def test_reruns_are_byte_identical(tmp_path, output_root):
    cli.run(_chain(tmp_path, 'first'))
    cli.run(_chain(tmp_path, 'second'))
    first = sorted(os.listdir(output_root / 'first'))
    assert first == sorted(os.listdir(output_root / 'second'))
    for name in first:
        assert (output_root / 'first' / name).read_bytes() == (output_root / 'second' / name).read_bytes()


def test_failed_run_does_not_abort_siblings(tmp_path, output_root, monkeypatch):
    real_expand = cli.expand

    def flaky(r, family, order=None, ellipse=None):
        if family == 'faber' and order == 8:
            raise EllipseMapError("elipse degenerada")
        return real_expand(r, family, order, ellipse)

    monkeypatch.setattr(cli, 'expand', flaky)
    assert cli.main(['run', _write(tmp_path, CHAIN.format(output_dir='chain_small'))]) == cli.EXIT_NUMERIC
    summary = reports.load_json(output_root / 'chain_small' / 'summary.json')
    status = {run['tag']: run['status'] for run in summary['runs']}
    assert status.pop('faber_n8') == 'failed'
    assert set(status.values()) == {'ok'}


def test_kernel_and_oracle_subcommands(tmp_path, output_root):
    path = _write(tmp_path, CHAIN.format(output_dir='chain_small'))
    assert cli.main(['kernel', path]) == cli.EXIT_OK
    out = output_root / 'chain_small'
    assert (out / 'faber_n8_kernel.csv').exists()
    assert not (out / 'faber_n8_trajectory.csv').exists()
    assert cli.main(['oracle', path]) == cli.EXIT_OK
    reference = reports.load_trajectory_csv(out / 'reference.csv')
    assert reference.values[0] == 1.0


def test_compare_with_itself(tmp_path, output_root):
    cli.run(_chain(tmp_path))
    out = str(output_root / 'chain_small')
    result = cli.compare(out, out, output_dir=str(tmp_path / 'diff'))
    assert not result['regressed']
    assert len(result['pairs']) == 5
    assert all(row['max_abs_diff'] == 0.0 for row in result['pairs'])
    diff = reports.load_error_csv(tmp_path / 'diff' / 'diff_faber_n4__faber_n4.csv')
    assert np.all(diff['error'] == 0.0)
    assert cli.main(['compare', out, out]) == cli.EXIT_OK


def test_compare_flags_regression(tmp_path, output_root):
    cli.run(_chain(tmp_path))
    out = output_root / 'chain_small'
    summary = reports.load_json(out / 'summary.json')
    for run in summary['runs']:
        run['max_error'] *= 2.0
    worse = tmp_path / 'worse.json'
    worse.write_text(json.dumps(summary))
    # os CSV são lidos da pasta do resumo
    for name in os.listdir(out):
        if name.endswith('_trajectory.csv'):
            (tmp_path / name).write_bytes((out / name).read_bytes())
    result = cli.compare(str(out), str(worse))
    assert result['regressed']
    assert cli.main(['compare', str(out), str(worse)]) == cli.EXIT_NUMERIC


def test_compare_rejects_different_grids(tmp_path, output_root):
    cli.run(_chain(tmp_path, 'fine'))
    coarse = CHAIN.format(output_dir='coarse').replace('output_dt = 0.1', 'output_dt = 0.2')
    cli.run(cli.load_config(_write(tmp_path, coarse, 'coarse.ini')))
    with pytest.raises(GridMismatchError):
        cli.compare(str(output_root / 'fine'), str(output_root / 'coarse'))


def test_erdos_renyi_seeds_change_values_not_schema(tmp_path, output_root):
    first = cli.run(cli.load_config(_write(tmp_path, ER.format(seed=1), 'er1.ini')))
    second = cli.run(cli.load_config(_write(tmp_path, ER.format(seed=2), 'er2.ini')))
    assert sorted(first) == sorted(second)
    assert [run['tag'] for run in first['runs']] == [run['tag'] for run in second['runs']]
    a = reports.load_trajectory_csv(output_root / 'er_1' / 'faber_n6_trajectory.csv')
    b = reports.load_trajectory_csv(output_root / 'er_2' / 'faber_n6_trajectory.csv')
    assert a.times.shape == b.times.shape
    assert not np.array_equal(a.values, b.values)


def test_erdos_renyi_needs_seed(tmp_path):
    text = ER.format(seed=1).replace('seed = 1\n', '')
    with pytest.raises(ConfigError):
        cli.load_config(_write(tmp_path, text))


def test_analytic_oracle_follows_spring_normalization(tmp_path, output_root):
    text = (CHAIN.format(output_dir='analytic')
            .replace('oracle = matrix_exp', 'oracle = analytic_l2')
            .replace('n_nodes = 20', 'n_nodes = 20\nl_norm = 2'))
    assert cli.main(['oracle', _write(tmp_path, text)]) == cli.EXIT_OK
    reference = reports.load_trajectory_csv(output_root / 'analytic' / 'reference.csv')
    expected = oracles.vacf_analytic_l2(reference.times, np.sqrt(0.5))
    assert np.max(np.abs(reference.values - expected)) < 1e-15
