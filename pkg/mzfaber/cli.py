"""
Executor de experimentos por linha de comando.

    python -m mzfaber run experiments/chain_l2.ini
    python -m mzfaber kernel experiments/chain_l2.ini
    python -m mzfaber oracle experiments/chain_l2.ini
    python -m mzfaber compare data/runs/chain_l2 data/runs/chain_l2_b

Cada arquivo .ini descreve um experimento: modelo, projeção, famílias,
ordens, integrador e oráculo. Os resultados vão para
OUTPUT_ROOT/<output_dir> como CSV (trajetórias, núcleos, erros) e JSON
(resumo e metadados).

Códigos de saída: 0 sucesso, 1 erro de configuração, 2 falha numérica.
"""

import argparse
import configparser
import json
import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mzfaber import config, models, oracles, reports
from mzfaber.errors import ConfigError, DimensionError, GridMismatchError, MZFaberError
from mzfaber.gle_solver import SolverConfig, Trajectory, solve_gle
from mzfaber.mz_kernels import Family, ReducedModel, StatsKind, SystemSpec, expand, reduce

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

SPECTRAL = ('lagrange', 'newton')
PROJECTIONS = {'chorin': StatsKind.CHORIN_INITIAL, 'berne': StatsKind.BERNE_EQUILIBRIUM_QUADRATIC}

_MISSING = object()
_SECTION = re.compile(r'^\[([^\]]+)\]')
_OPTION = re.compile(r'^([^=:#;\s][^=:]*?)\s*[=:]')


def _bool(raw):
    value = raw.strip().lower()
    if value in ('true', '1', 't'):
        return True
    if value in ('false', '0', 'f'):
        return False
    raise ValueError(f"booleano inválido: {raw}")


def _list(cast):
    def parse(raw):
        return tuple(cast(item.strip()) for item in raw.split(',') if item.strip())
    return parse


# chaves aceitas na seção [model] de cada modelo
MODEL_KEYS = {
    'chain_bethe': {'l': int, 'shells': int, 'n_nodes': int, 'boundary': str, 'root_is_shell': _bool,
                    'k': float, 'm': float, 'l_norm': float},
    'chain_er': {'n': int, 'p': float, 'k': float, 'm': float, 'l_norm': float},
    'wave_annulus': {'n_radial': int, 'n_angular': int, 'n_random_modes': int, 'r1': float, 'r2': float,
                     'sensor_r': float, 'sensor_theta': float, 'mode_mean': float},
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    model: str
    model_params: dict
    projection: StatsKind
    families: tuple
    orders: tuple
    solver: SolverConfig
    output_dt: float
    oracle: str
    output_dir: str
    seed: int = None
    observable: int = None
    n_samples: int = config.DEFAULT_MC_SAMPLES

    def __post_init__(self):
        if not self.families:
            raise ConfigError("families não pode ser vazio")
        if any(n < 1 for n in self.orders) or list(self.orders) != sorted(set(self.orders)):
            raise ConfigError(f"orders precisam ser positivas e crescentes: {self.orders}")
        if self.stochastic and self.seed is None:
            raise ConfigError("seed é obrigatório para modelo ou oráculo estocástico")

    @property
    def stochastic(self):
        return self.model in ('chain_er', 'wave_annulus') or self.oracle == 'monte_carlo'

    @property
    def stride(self):
        return int(round(self.output_dt / self.solver.dt))

    @property
    def output_grid(self):
        return self.solver.times[::self.stride]

    def runs(self):
        """Pares (família, ordem); Lagrange e Newton rodam uma vez com o espectro inteiro."""
        out = []
        for family in self.families:
            if family in SPECTRAL:
                out.append((family, None))
            else:
                out.extend((family, n) for n in self.orders)
        return out


def _line_index(text):
    """Mapa (seção, chave) -> número da linha, para mensagens de erro."""
    index = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION.match(line)
        if match:
            section = match.group(1).strip()
            index[(section, None)] = number
            continue
        match = _OPTION.match(line)
        if match and section is not None:
            index[(section, match.group(1).strip().lower())] = number
    return index


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines

    def line(self, section, key=None):
        return self.lines.get((section, key), self.lines.get((section, None)))

    def get(self, section, key, cast=str, default=_MISSING):
        if not self.parser.has_option(section, key):
            if default is _MISSING:
                raise ConfigError(f"[{section}] {key} é obrigatório", line=self.line(section))
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return cast(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"[{section}] {key} = {raw!r} inválido ({e})", line=self.line(section, key)) from e

    def choice(self, section, key, allowed, default=_MISSING):
        value = self.get(section, key, str, default)
        if value not in allowed:
            raise ConfigError(f"[{section}] {key} = {value!r} fora de {allowed}", line=self.line(section, key))
        return value


def _parse(path):
    if not os.path.exists(path):
        raise ConfigError(f"Arquivo de experimento não encontrado: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("arquivo sem cabeçalho de seção", line=e.lineno) from e
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"opção repetida [{e.section}] {e.option}", line=e.lineno) from e
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"seção repetida [{e.section}]", line=e.lineno) from e
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigError("linha não reconhecida", line=lineno) from e
    return _Reader(parser, _line_index(text))


def _model_params(reader, model):
    keys = MODEL_KEYS[model]
    params = {}
    if reader.parser.has_section('model'):
        for key in reader.parser.options('model'):
            if key not in keys:
                raise ConfigError(f"[model] chave desconhecida para {model}: {key}", line=reader.line('model', key))
            params[key] = reader.get('model', key, keys[key])

    if model == 'chain_bethe':
        if 'l' not in params or ('shells' not in params and 'n_nodes' not in params):
            raise ConfigError("chain_bethe exige l e shells (ou n_nodes para l = 2)", line=reader.line('model'))
        if 'n_nodes' in params and params['l'] != 2:
            raise ConfigError("n_nodes só vale para a cadeia l = 2", line=reader.line('model', 'n_nodes'))
        if params.get('boundary', 'fixed') not in ('fixed', 'free'):
            raise ConfigError(f"boundary = {params['boundary']!r} fora de ('fixed', 'free')",
                              line=reader.line('model', 'boundary'))
    elif model == 'chain_er':
        if 'n' not in params or 'p' not in params:
            raise ConfigError("chain_er exige n e p", line=reader.line('model'))
    return params


def wave_spec(params, seed):
    n_radial = params.get('n_radial', 5)
    n_angular = params.get('n_angular', 5)
    return models.WaveModelSpec(
        n_radial=n_radial,
        n_angular=n_angular,
        n_random_modes=params.get('n_random_modes', n_radial * n_angular),
        r1=params.get('r1', 1.0),
        r2=params.get('r2', 11.0),
        sensor_point=(params.get('sensor_r', 1.1), params.get('sensor_theta', 0.1)),
        rng_seed=0 if seed is None else seed,
        mode_mean=params.get('mode_mean', 0.0),
    )


def load_config(path):
    """
    Lê e valida um arquivo de experimento.

    Raises:
        ConfigError: com o número da linha quando a chave existe no arquivo
    """
    reader = _parse(path)
    name = reader.get('experiment', 'name', str, os.path.splitext(os.path.basename(path))[0])
    model = reader.choice('experiment', 'model', config.ALLOWED_MODELS)
    default_projection = 'chorin' if model == 'wave_annulus' else 'berne'
    projection = reader.choice('experiment', 'projection', tuple(PROJECTIONS), default_projection)
    if model == 'wave_annulus' and projection == 'berne':
        raise ConfigError("projeção de Berne exige cadeia harmônica", line=reader.line('experiment', 'projection'))

    families = reader.get('experiment', 'families', _list(str))
    if not families:
        raise ConfigError("families não pode ser vazio", line=reader.line('experiment', 'families'))
    for family in families:
        if family not in config.ALLOWED_FAMILIES:
            raise ConfigError(f"família desconhecida: {family}", line=reader.line('experiment', 'families'))
    orders = reader.get('experiment', 'orders', _list(int), ())
    if not orders and any(f not in SPECTRAL for f in families):
        raise ConfigError("orders é obrigatório para dyson e faber", line=reader.line('experiment'))
    if any(n < 1 for n in orders) or list(orders) != sorted(set(orders)):
        raise ConfigError(f"orders precisam ser positivas e crescentes: {orders}",
                          line=reader.line('experiment', 'orders'))

    oracle = reader.choice('experiment', 'oracle', config.ALLOWED_ORACLES, 'matrix_exp')
    seed = reader.get('experiment', 'seed', int, None)
    observable = reader.get('experiment', 'observable', int, None)
    output_dir = reader.get('experiment', 'output_dir', str, name)
    params = _model_params(reader, model)

    if oracle == 'analytic_l2' and (model != 'chain_bethe' or params.get('l') != 2 or projection != 'berne'):
        raise ConfigError("oráculo analytic_l2 só vale para a cadeia l = 2 com projeção de Berne",
                          line=reader.line('experiment', 'oracle'))
    if (model in ('chain_er', 'wave_annulus') or oracle == 'monte_carlo') and seed is None:
        raise ConfigError("seed é obrigatório para modelo ou oráculo estocástico", line=reader.line('experiment'))
    if model == 'wave_annulus':
        try:
            wave_spec(params, seed)
        except DimensionError as e:
            raise ConfigError(str(e), line=reader.line('model')) from e

    dt = reader.get('solver', 'dt', float, config.DEFAULT_DT)
    t_final = reader.get('solver', 't_final', float, config.DEFAULT_T_FINAL)
    output_dt = reader.get('solver', 'output_dt', float, config.DEFAULT_OUTPUT_DT)
    try:
        solver = SolverConfig(dt=dt, t_final=t_final)
    except DimensionError as e:
        raise ConfigError(str(e), line=reader.line('solver')) from e
    stride = output_dt / dt
    if output_dt < dt or abs(stride - round(stride)) > 1e-6 or solver.n_steps % int(round(stride)):
        raise ConfigError(f"output_dt = {output_dt} precisa ser múltiplo de dt = {dt} e dividir t_final",
                          line=reader.line('solver', 'output_dt'))

    n_samples = reader.get('oracle', 'n_samples', int, config.DEFAULT_MC_SAMPLES)
    if n_samples < 1:
        raise ConfigError(f"n_samples precisa ser positivo: {n_samples}", line=reader.line('oracle', 'n_samples'))

    return ExperimentConfig(
        name=name,
        model=model,
        model_params=params,
        projection=PROJECTIONS[projection],
        families=families,
        orders=orders,
        solver=solver,
        output_dt=output_dt,
        oracle=oracle,
        output_dir=output_dir,
        seed=seed,
        observable=observable,
        n_samples=n_samples,
    )


def resolve_output_dir(cfg):
    if os.path.isabs(cfg.output_dir):
        return cfg.output_dir
    return os.path.join(config.OUTPUT_ROOT, cfg.output_dir)


def _bethe_graph(params):
    l = params['l']
    boundary = params.get('boundary', 'fixed' if l == 2 else 'free')
    if 'n_nodes' in params:
        padding = 2 if boundary == 'fixed' else 0
        graph = models.build_path(params['n_nodes'] + padding)
    else:
        graph = models.build_bethe(l, params['shells'], params.get('root_is_shell', False))
    return models.fix_endpoints(graph) if boundary == 'fixed' else graph


def build_system(cfg):
    """
    Monta o sistema linear do experimento.

    Returns:
        tuple: (SystemSpec, índice do observável, amostrador, metadados do modelo)
    """
    params = cfg.model_params
    if cfg.model == 'wave_annulus':
        system, sampler, sensor = models.build_wave_model(wave_spec(params, cfg.seed))
        info = {'sensor_index': sensor.index, 'sensor_node': list(sensor.node), 'sensor_offset': sensor.offset}
        return system, cfg.observable or sensor.index, sampler, info

    if cfg.model == 'chain_bethe':
        graph = _bethe_graph(params)
    else:
        graph = models.build_erdos_renyi(params['n'], params['p'], cfg.seed)
    system = models.build_chain_system(graph, k=params.get('k', 1.0), m=params.get('m', 1.0),
                                       l_norm=params.get('l_norm'), label=cfg.name)
    if cfg.projection is StatsKind.CHORIN_INITIAL:
        system = SystemSpec(system.A, system.init_mean, StatsKind.CHORIN_INITIAL, system.label)
    sampler = models.equilibrium_sampler(system)
    info = {'n_nodes': graph.n_nodes, 'n_edges': graph.n_edges}
    logger.info(f"{cfg.model}: {graph.n_nodes} osciladores, {graph.n_edges} molas")
    return system, cfg.observable or 1, sampler, info


def compute_reference(cfg, system, index, sampler, grid):
    """Trajetória de referência do oráculo configurado na grade de saída."""
    berne = system.stats_kind is StatsKind.BERNE_EQUILIBRIUM_QUADRATIC
    if cfg.oracle == 'analytic_l2':
        params = cfg.model_params
        k_eff = models.spring_constant(params.get('k', 1.0), params.get('l_norm'))
        omega = math.sqrt(k_eff / params.get('m', 1.0))
        return Trajectory(grid, oracles.vacf_analytic_l2(grid, omega))
    if cfg.oracle == 'monte_carlo':
        if berne:
            return oracles.mc_autocorrelation(system, index, grid, cfg.n_samples, cfg.seed)
        return oracles.mc_mean(system, sampler, index, grid, cfg.n_samples, cfg.seed)
    if berne:
        return oracles.vacf_matrix_exp(system, index, grid)
    return oracles.mean_matrix_exp(system, index, grid)


def error_metrics(values, reference, output_dt):
    """Erro máximo e norma L2 discreta sqrt(dt sum e^2) na grade de saída."""
    error = np.asarray(values) - np.asarray(reference)
    return float(np.max(np.abs(error))), float(np.sqrt(output_dt * np.sum(error ** 2)))


def run_tag(family, order):
    return family if family in SPECTRAL else f"{family}_n{order}"


def _write_kernel(out_dir, tag, kernel, reduced):
    reports.save_kernel_csv(os.path.join(out_dir, f"{tag}_kernel.csv"), kernel)
    meta = {'family': kernel.family.value, 'order': kernel.order, 'a': reduced.a, 'b': reduced.b,
            'observable': reduced.index, 'projection': reduced.projection.value}
    if kernel.family is Family.FABER:
        meta['ellipse'] = kernel.mode_params.as_dict()
    reports.save_json(os.path.join(out_dir, f"{tag}_kernel.json"), meta)


def _run_one(cfg, reduced, family, order, y0, reference, out_dir):
    tag = run_tag(family, order)
    entry = {'family': family, 'order': order, 'tag': tag}
    try:
        kernel = expand(reduced, family, order)
        model = ReducedModel.from_reduced(reduced, kernel)
        trajectory = solve_gle(model, y0, cfg.solver).on_grid(cfg.output_dt)
    except MZFaberError as e:
        logger.error(f"{tag}: {type(e).__name__}: {e}")
        entry.update(status='failed', error=f"{type(e).__name__}: {e}")
        return entry

    _write_kernel(out_dir, tag, kernel, reduced)
    files = {'kernel': f"{tag}_kernel.csv", 'trajectory': f"{tag}_trajectory.csv", 'error': f"{tag}_error.csv"}
    reports.save_trajectory_csv(os.path.join(out_dir, files['trajectory']), trajectory)
    reports.save_error_csv(os.path.join(out_dir, files['error']), trajectory.times, trajectory.values, reference.values)
    max_error, l2_error = error_metrics(trajectory.values, reference.values, cfg.output_dt)
    logger.info(f"{tag}: erro máximo {max_error:.3e}, L2 {l2_error:.3e}")
    entry.update(status='ok', order=kernel.order, max_error=max_error, l2_error=l2_error, files=files)
    return entry


def _prepare(cfg):
    system, index, sampler, info = build_system(cfg)
    reduced = reduce(system, index)
    out_dir = resolve_output_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    summary = {
        'experiment': cfg.name,
        'model': cfg.model,
        'model_info': info,
        'projection': cfg.projection.value,
        'oracle': cfg.oracle,
        'seed': cfg.seed,
        'observable': index,
        'solver': {'dt': cfg.solver.dt, 't_final': cfg.solver.t_final, 'output_dt': cfg.output_dt},
        'reduced': {'a': reduced.a, 'b': reduced.b, 'dim': int(system.dim)},
    }
    return system, index, sampler, reduced, out_dir, summary


def _reference(cfg, system, index, sampler, out_dir):
    reference = compute_reference(cfg, system, index, sampler, cfg.output_grid)
    reports.save_trajectory_csv(os.path.join(out_dir, 'reference.csv'), reference)
    meta = {'oracle': cfg.oracle, 'observable': index}
    if cfg.oracle == 'monte_carlo':
        meta.update(n_samples=cfg.n_samples, seed=cfg.seed, max_stderr=float(np.max(reference.stderr)))
    reports.save_json(os.path.join(out_dir, 'reference.json'), meta)
    return reference


def run(cfg):
    """
    Executa o experimento: referência, depois cada (família, ordem) em paralelo.

    Uma falha numérica numa execução é registrada no resumo sem abortar as demais.

    Returns:
        dict: resumo gravado em summary.json
    """
    system, index, sampler, reduced, out_dir, summary = _prepare(cfg)
    reference = _reference(cfg, system, index, sampler, out_dir)
    y0 = 1.0 if system.stats_kind is StatsKind.BERNE_EQUILIBRIUM_QUADRATIC else float(system.init_mean[index - 1])

    def task(run_spec):
        family, order = run_spec
        return _run_one(cfg, reduced, family, order, y0, reference, out_dir)

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
        entries = list(executor.map(task, cfg.runs()))

    summary.update(reference='reference.csv', y0=y0, runs=entries)
    reports.save_json(os.path.join(out_dir, 'summary.json'), summary)
    failed = sum(entry['status'] != 'ok' for entry in entries)
    logger.info(f"Experimento {cfg.name}: {len(entries) - failed} execuções ok, {failed} com falha, em {out_dir}")
    return summary


def kernel_only(cfg):
    """Só os coeficientes dos núcleos, sem integrar a GLE."""
    _, _, _, reduced, out_dir, summary = _prepare(cfg)
    entries = []
    for family, order in cfg.runs():
        tag = run_tag(family, order)
        try:
            kernel = expand(reduced, family, order)
        except MZFaberError as e:
            logger.error(f"{tag}: {type(e).__name__}: {e}")
            entries.append({'family': family, 'order': order, 'tag': tag, 'status': 'failed', 'error': str(e)})
            continue
        _write_kernel(out_dir, tag, kernel, reduced)
        entries.append({'family': family, 'order': kernel.order, 'tag': tag, 'status': 'ok',
                        'files': {'kernel': f"{tag}_kernel.csv"}})
    summary.update(runs=entries)
    reports.save_json(os.path.join(out_dir, 'kernels.json'), summary)
    return summary


def oracle_only(cfg):
    """Só a trajetória de referência."""
    system, index, sampler, _, out_dir, summary = _prepare(cfg)
    _reference(cfg, system, index, sampler, out_dir)
    summary.update(reference='reference.csv', runs=[])
    reports.save_json(os.path.join(out_dir, 'oracle.json'), summary)
    return summary


def _load_summary(path):
    if os.path.isdir(path):
        path = os.path.join(path, 'summary.json')
    if not os.path.exists(path):
        raise ConfigError(f"Relatório não encontrado: {path}")
    return os.path.dirname(os.path.abspath(path)), reports.load_json(path)


def _pair_runs(runs_a, runs_b):
    ok_a = [r for r in runs_a if r['status'] == 'ok']
    ok_b = [r for r in runs_b if r['status'] == 'ok']
    by_key = {(r['family'], r['order']): r for r in ok_b}
    pairs = [(r, by_key[(r['family'], r['order'])]) for r in ok_a if (r['family'], r['order']) in by_key]
    if pairs:
        return pairs
    # relatórios de uma família só: pareia pela ordem
    if len({r['family'] for r in ok_a}) == 1 and len({r['family'] for r in ok_b}) == 1:
        by_order = {r['order']: r for r in ok_b}
        return [(r, by_order[r['order']]) for r in ok_a if r['order'] in by_order]
    return []


def compare(report_a, report_b, tolerance=None, output_dir=None):
    """
    Compara dois relatórios execução a execução.

    Regressão: erro máximo ou L2 de b acima do de a por mais que a
    tolerância relativa.

    Raises:
        GridMismatchError: sem execuções em comum ou com grades diferentes
    """
    tolerance = config.COMPARE_TOLERANCE if tolerance is None else tolerance
    dir_a, summary_a = _load_summary(report_a)
    dir_b, summary_b = _load_summary(report_b)
    pairs = _pair_runs(summary_a['runs'], summary_b['runs'])
    if not pairs:
        raise GridMismatchError("Nenhuma execução em comum entre os relatórios")

    rows = []
    for run_a, run_b in pairs:
        traj_a = reports.load_trajectory_csv(os.path.join(dir_a, run_a['files']['trajectory']))
        traj_b = reports.load_trajectory_csv(os.path.join(dir_b, run_b['files']['trajectory']))
        if traj_a.times.shape != traj_b.times.shape or not np.array_equal(traj_a.times, traj_b.times):
            raise GridMismatchError(f"Grades diferentes entre {run_a['tag']} e {run_b['tag']}")
        diff = traj_b.values - traj_a.values
        if output_dir is not None:
            reports.save_error_csv(os.path.join(output_dir, f"diff_{run_a['tag']}__{run_b['tag']}.csv"),
                                   traj_a.times, traj_b.values, traj_a.values)
        regressed = any(run_b[key] > run_a[key] * (1.0 + tolerance) for key in ('max_error', 'l2_error'))
        rows.append({
            'a': run_a['tag'],
            'b': run_b['tag'],
            'max_abs_diff': float(np.max(np.abs(diff))),
            'max_error_a': run_a['max_error'],
            'max_error_b': run_b['max_error'],
            'l2_error_a': run_a['l2_error'],
            'l2_error_b': run_b['l2_error'],
            'regressed': bool(regressed),
        })
        if regressed:
            logger.warning(f"Regressão: {run_b['tag']} com erro {run_b['max_error']:.3e} contra {run_a['max_error']:.3e}")

    result = {'report_a': dir_a, 'report_b': dir_b, 'tolerance': tolerance, 'pairs': rows,
              'regressed': any(row['regressed'] for row in rows)}
    if output_dir is not None:
        reports.save_json(os.path.join(output_dir, 'compare.json'), result)
    return result


COMMANDS = {'run': run, 'kernel': kernel_only, 'oracle': oracle_only}


def build_parser():
    parser = argparse.ArgumentParser(prog='mzfaber', description='Núcleos de memória de Mori-Zwanzig para sistemas lineares')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, text in (('run', 'executa o experimento completo'),
                       ('kernel', 'só os coeficientes dos núcleos'),
                       ('oracle', 'só a referência')):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument('config', help='arquivo .ini do experimento')
    cmp = sub.add_parser('compare', help='compara dois relatórios')
    cmp.add_argument('report_a')
    cmp.add_argument('report_b')
    cmp.add_argument('--tolerance', type=float, default=None, help='tolerância relativa de regressão')
    cmp.add_argument('--output', default=None, help='pasta para os CSV de diferenças')
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    logging.basicConfig(format="[%(module)-12s] %(levelname)s %(message)s", level=config.LOG_LEVEL)

    try:
        if args.command == 'compare':
            result = compare(args.report_a, args.report_b, args.tolerance, args.output)
            print(json.dumps(result, indent=2, sort_keys=True))
            return EXIT_NUMERIC if result['regressed'] else EXIT_OK
        cfg = load_config(args.config)
        summary = COMMANDS[args.command](cfg)
    except (ConfigError, GridMismatchError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except MZFaberError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_NUMERIC

    failed = [entry['tag'] for entry in summary.get('runs', []) if entry['status'] != 'ok']
    if failed:
        logger.error(f"Execuções com falha: {', '.join(failed)}")
        return EXIT_NUMERIC
    return EXIT_OK
