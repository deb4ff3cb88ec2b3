"""
Persistência dos resultados em arquivos CSV e JSON.

CSV com cabeçalho, separados por vírgula, 17 algarismos significativos em
notação exponencial; metadados sempre num JSON ao lado, nunca no CSV.
"""

import json
import logging
import os

import networkx as nx
import numpy as np

from mzfaber.errors import DimensionError, GridMismatchError
from mzfaber.gle_solver import Trajectory
from mzfaber.matrix_core import Spectrum
from mzfaber.models import GraphSpec
from mzfaber.mz_kernels import Family, KernelExpansion

logger = logging.getLogger(__name__)

CSV_FORMAT = '%.16e'
SPECTRAL_FAMILIES = (Family.LAGRANGE, Family.NEWTON)


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _write_csv(path, header, columns):
    _ensure_parent(path)
    data = np.column_stack(columns) if columns else np.zeros((0, len(header)))
    np.savetxt(path, data, fmt=CSV_FORMAT, delimiter=',', header=','.join(header), comments='')


def _read_csv(path):
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline().strip().split(',')
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.size and data.shape[1] != len(header):
        raise DimensionError(f"{path}: {data.shape[1]} colunas para o cabeçalho {header}")
    return header, data


def save_trajectory_csv(path, trajectory):
    """Salva t,y (e stderr quando houver)."""
    header = ['t', 'y']
    columns = [trajectory.times, trajectory.values]
    if trajectory.stderr is not None:
        header.append('stderr')
        columns.append(trajectory.stderr)
    _write_csv(path, header, columns)
    logger.debug(f"Trajetória salva em {path} ({len(trajectory)} pontos)")


def load_trajectory_csv(path):
    header, data = _read_csv(path)
    if header[:2] != ['t', 'y']:
        raise DimensionError(f"{path}: cabeçalho de trajetória inesperado {header}")
    stderr = data[:, 2] if 'stderr' in header else None
    return Trajectory(data[:, 0], data[:, 1], stderr)


def save_kernel_csv(path, expansion):
    """
    Salva a tabela j,g_j,f_j.

    Famílias espectrais acrescentam as partes imaginárias e os nós
    lambda_j (colunas lambda_re, lambda_im); para Faber os parâmetros da
    elipse vão no JSON de metadados.
    """
    j = np.arange(expansion.order + 1)
    header = ['j', 'g_j', 'f_j']
    g = np.asarray(expansion.g)
    f = np.asarray(expansion.f)
    columns = [j, g.real, f.real]
    if expansion.family in SPECTRAL_FAMILIES:
        lam = expansion.mode_params.eigenvalues
        header += ['g_j_imag', 'f_j_imag', 'lambda_re', 'lambda_im']
        columns += [g.imag, f.imag, lam.real, lam.imag]
    _write_csv(path, header, columns)


def load_kernel_csv(path, family, mode_params=None):
    """
    Lê uma tabela de coeficientes.

    Para Lagrange e Newton o Spectrum é reconstruído das colunas lambda;
    para Faber é preciso passar o EllipseMap em `mode_params`.
    """
    family = Family(family)
    header, data = _read_csv(path)
    g = data[:, header.index('g_j')]
    f = data[:, header.index('f_j')]
    if family in SPECTRAL_FAMILIES:
        g = g + 1j * data[:, header.index('g_j_imag')]
        f = f + 1j * data[:, header.index('f_j_imag')]
        mode_params = Spectrum(data[:, header.index('lambda_re')] + 1j * data[:, header.index('lambda_im')])
    return KernelExpansion(family, data.shape[0] - 1, g, f, mode_params)


def save_error_csv(path, times, values, reference):
    """Salva t,y,reference,error com error = y - reference."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if not times.shape == values.shape == reference.shape:
        raise GridMismatchError(f"Grades incompatíveis: {times.shape}, {values.shape}, {reference.shape}")
    _write_csv(path, ['t', 'y', 'reference', 'error'], [times, values, reference, values - reference])


def load_error_csv(path):
    header, data = _read_csv(path)
    return {name: data[:, i] for i, name in enumerate(header)}


def save_matrix_csv(path, m):
    """Despejo de depuração: uma linha da matriz por linha do arquivo."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _ensure_parent(path)
    np.savetxt(path, m, fmt=CSV_FORMAT, delimiter=',')


def save_json(path, payload):
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')


def load_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Objeto não serializável: {type(value).__name__}")


def save_edge_list(path, graph):
    """Lista de arestas 'i j', uma por linha, com nós numerados a partir de 1."""
    _ensure_parent(path)
    relabeled = nx.relabel_nodes(graph.to_networkx(), {i: i + 1 for i in range(graph.n_nodes)})
    nx.write_edgelist(relabeled, path, data=False)


def load_edge_list(path, n_nodes=None):
    """
    Lê uma lista de arestas 1-indexada.

    Nós isolados não aparecem no arquivo; `n_nodes` recupera o tamanho.
    """
    graph = nx.read_edgelist(path, nodetype=int, data=False)
    size = max([n_nodes or 0] + list(graph.nodes))
    full = nx.empty_graph(size)
    full.add_edges_from((i - 1, j - 1) for i, j in graph.edges)
    return GraphSpec.from_networkx(full)
