"""
Referências independentes para as expansões: álgebra de operadores sobre
observáveis afins, autocorrelação analítica e por exponencial de matriz,
propagação exata da média e Monte Carlo.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

from mzfaber import config
from mzfaber.errors import DimensionError, ProjectionError
from mzfaber.gle_solver import Trajectory
from mzfaber.models import equilibrium_sampler, is_hamiltonian_chain
from mzfaber.mz_kernels import StatsKind, _is_uniform_from_zero

logger = logging.getLogger(__name__)

# Número fixo de lotes de Monte Carlo: o resultado não depende de MAX_WORKERS
MC_CHUNKS = 16


@dataclass(frozen=True)
class AffineObservableRep:
    """
    Representação de L, P e Q sobre observáveis afins u(x) = c + v . x.

    Coordenadas (c, v_1, ..., v_N). L u = v . A x, logo L_rep = [[0, 0], [0, A^T]].
    """

    dim: int
    L_rep: np.ndarray
    P_rep: np.ndarray
    observable_index: int

    @classmethod
    def from_system(cls, system, observable_index=1):
        n = system.dim
        if not 1 <= observable_index <= n:
            raise ProjectionError(f"Índice de observável {observable_index} fora de 1..{n}")
        k = observable_index
        l_rep = np.zeros((n + 1, n + 1))
        l_rep[1:, 1:] = system.A.T

        p_rep = np.zeros((n + 1, n + 1))
        p_rep[k, k] = 1.0
        if system.stats_kind is StatsKind.CHORIN_INITIAL:
            # média condicional: as coordenadas não resolvidas viram suas médias
            p_rep[0, 0] = 1.0
            rest = [i for i in range(1, n + 1) if i != k]
            p_rep[0, rest] = system.init_mean[np.array(rest, dtype=int) - 1]
        return cls(n + 1, l_rep, p_rep, observable_index)

    @property
    def Q_rep(self):
        return np.eye(self.dim) - self.P_rep

    def rep(self, symbol):
        reps = {'L': self.L_rep, 'P': self.P_rep, 'Q': self.Q_rep}
        if symbol not in reps:
            raise DimensionError(f"Símbolo de operador desconhecido: {symbol!r}")
        return reps[symbol]

    def observable(self):
        """Coordenadas do observável resolvido x_i."""
        out = np.zeros(self.dim)
        out[self.observable_index] = 1.0
        return out


def operator_oracle(system, word, observable_index=1):
    """
    Produto das representações de uma palavra em {L, P, Q}.

    A palavra é lida como composição de operadores: "PLQL" é P L Q L, com o
    último símbolo agindo primeiro. Aplicado a x_i (coluna observable_index),
    P L (QL)^j QL x_i tem coordenadas c = f_j e v_i = g_j.
    """
    rep = AffineObservableRep.from_system(system, observable_index)
    product = np.eye(rep.dim)
    for symbol in word:
        product = product @ rep.rep(symbol)
    return product


def apply_word(system, word, observable_index=1):
    """operator_oracle aplicado ao próprio observável x_i."""
    rep = AffineObservableRep.from_system(system, observable_index)
    return operator_oracle(system, word, observable_index) @ rep.observable()


def vacf_analytic_l2(t, omega=1.0):
    """C(t) = J0(2 omega t) - J4(2 omega t), a cadeia semi-infinita com parede fixa."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DimensionError("Tempo negativo")
    x = 2.0 * omega * t
    value = scipy.special.jv(0, x) - scipy.special.jv(4, x)
    return float(value) if value.ndim == 0 else value


def _propagate(A, vector, grid):
    """Linhas e^{t_k A} v para cada tempo da grade."""
    grid = np.asarray(grid, dtype=float)
    out = np.zeros((grid.size, vector.size))
    if grid.size == 0:
        return out
    if _is_uniform_from_zero(grid):
        step = scipy.linalg.expm((grid[1] - grid[0]) * A)
        out[0] = vector
        for i in range(1, grid.size):
            out[i] = step @ out[i - 1]
    else:
        for i, t in enumerate(grid):
            out[i] = scipy.linalg.expm(t * A) @ vector
    return out


def _check_momentum_index(system, index):
    if not is_hamiltonian_chain(system.A):
        raise ProjectionError("Autocorrelação de equilíbrio exige cadeia hamiltoniana (bloco p antes do bloco q)")
    n = system.dim // 2
    if not 1 <= index <= n:
        raise ProjectionError(f"Índice {index} fora do bloco de momentos 1..{n}")


def vacf_matrix_exp(system, index, grid):
    """
    C_{p_i}(t) = [e^{tC}]_{ii}: no equilíbrio p_i só se correlaciona consigo mesmo.

    Returns:
        Trajectory: autocorrelação normalizada na grade
    """
    _check_momentum_index(system, index)
    unit = np.zeros(system.dim)
    unit[index - 1] = 1.0
    columns = _propagate(system.A, unit, grid)
    return Trajectory(np.asarray(grid, dtype=float), columns[:, index - 1])


def mean_matrix_exp(system, index, grid):
    """Média exata e_i^T e^{tA} <x(0)> na grade."""
    if not 1 <= index <= system.dim:
        raise ProjectionError(f"Índice {index} fora de 1..{system.dim}")
    states = _propagate(system.A, system.init_mean, grid)
    return Trajectory(np.asarray(grid, dtype=float), states[:, index - 1])


def _observable_rows(system, index, grid):
    """R_k = e_i^T e^{t_k A}, pela propagação de e_i com A^T."""
    unit = np.zeros(system.dim)
    unit[index - 1] = 1.0
    return _propagate(system.A.T, unit, grid)


def _run_chunks(worker, n_samples, seed):
    """Divide as amostras em lotes com sementes derivadas e junta na ordem dos lotes."""
    if n_samples < 1:
        raise DimensionError(f"n_samples precisa ser positivo: {n_samples}")
    n_chunks = min(MC_CHUNKS, n_samples)
    sizes = [len(part) for part in np.array_split(np.arange(n_samples), n_chunks)]
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
        return list(executor.map(worker, sizes, seeds))


def mc_mean(system, sampler, index, grid, n_samples, seed):
    """
    Média de Monte Carlo do observável x_i ao longo das trajetórias exatas.

    Cada lote usa numpy.random.Generator(PCG64) com semente vinda de
    SeedSequence(seed).spawn, então o resultado é reprodutível bit a bit.

    Returns:
        Trajectory: média amostral com o erro padrão em `stderr`
    """
    if not 1 <= index <= system.dim:
        raise ProjectionError(f"Índice {index} fora de 1..{system.dim}")
    grid = np.asarray(grid, dtype=float)
    rows = _observable_rows(system, index, grid)

    def worker(size, seed_seq):
        rng = np.random.default_rng(seed_seq)
        values = rows @ sampler.sample(size, rng)
        return values.sum(axis=1), (values ** 2).sum(axis=1)

    totals = _run_chunks(worker, n_samples, seed)
    total = np.sum([t[0] for t in totals], axis=0)
    total_sq = np.sum([t[1] for t in totals], axis=0)
    mean = total / n_samples
    stderr = _standard_error(total_sq, mean, n_samples)
    logger.info(f"Monte Carlo: {n_samples} amostras, semente {seed}, erro padrão máximo {np.max(stderr):.3e}")
    return Trajectory(grid, mean, stderr)


def _standard_error(total_sq, mean, n_samples):
    if n_samples < 2:
        return np.zeros_like(mean)
    variance = np.maximum(total_sq - n_samples * mean ** 2, 0.0) / (n_samples - 1)
    return np.sqrt(variance / n_samples)


def mc_autocorrelation(system, index, grid, n_samples, seed, temperature=1.0):
    """
    Autocorrelação normalizada <p_i(t) p_i(0)> / <p_i(0)^2> por Monte Carlo
    sobre amostras de equilíbrio da cadeia.
    """
    _check_momentum_index(system, index)
    grid = np.asarray(grid, dtype=float)
    rows = _observable_rows(system, index, grid)
    sampler = equilibrium_sampler(system, temperature)

    def worker(size, seed_seq):
        rng = np.random.default_rng(seed_seq)
        x0 = sampler.sample(size, rng)
        products = (rows @ x0) * x0[index - 1]
        return products.sum(axis=1), (products ** 2).sum(axis=1), float(np.sum(x0[index - 1] ** 2))

    totals = _run_chunks(worker, n_samples, seed)
    total = np.sum([t[0] for t in totals], axis=0)
    total_sq = np.sum([t[1] for t in totals], axis=0)
    norm = sum(t[2] for t in totals) / n_samples
    mean = total / n_samples
    stderr = _standard_error(total_sq, mean, n_samples)
    return Trajectory(grid, mean / norm, stderr / norm)


def iterated_integral(phi, t, n):
    """
    Integral iterada int_0^t int_0^{s_1} ... int_0^{s_{n-1}} phi(s_n) ds_n ... ds_1
    por quadratura aninhada.
    """
    if n < 1:
        raise DimensionError(f"Ordem da integral iterada precisa ser >= 1: {n}")
    if n == 1:
        return scipy.integrate.quad(phi, 0.0, t)[0]
    return scipy.integrate.quad(lambda s: iterated_integral(phi, s, n - 1), 0.0, t)[0]


def cauchy_integral(phi, t, n):
    """Forma de integral única int_0^t (t - s)^{n-1}/(n-1)! phi(s) ds."""
    if n < 1:
        raise DimensionError(f"Ordem da integral precisa ser >= 1: {n}")
    weight = 1.0 / math.factorial(n - 1)
    return scipy.integrate.quad(lambda s: weight * (t - s) ** (n - 1) * phi(s), 0.0, t)[0]


def bessel_series(j, x):
    """J_j(x) pela série de potências ascendente, somada com math.fsum."""
    if j < 0:
        raise DimensionError(f"Ordem negativa: {j}")
    if x == 0:
        return 1.0 if j == 0 else 0.0
    half = 0.5 * x
    n_terms = 40 + 2 * int(math.ceil(abs(x)))
    terms = []
    for m in range(n_terms):
        power = 2 * m + j
        log_mag = power * math.log(abs(half)) - math.lgamma(m + 1) - math.lgamma(m + j + 1)
        sign = (-1) ** m * (-1 if half < 0 and power % 2 else 1)
        terms.append(sign * math.exp(log_mag))
    return math.fsum(terms)
