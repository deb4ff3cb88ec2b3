"""
Integrador da equação de Langevin generalizada escalar

    dy/dt = a y + b + int_0^t g(t-s) y(s) ds + int_0^t f(t-s) ds

Adams-Bashforth de 3ª ordem por fora, regra do trapézio na integral de
memória e RK4 nos dois primeiros passos.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.integrate

from mzfaber import config
from mzfaber.errors import (
    DimensionError,
    GridMismatchError,
    InconclusiveOrderError,
    NonFiniteError,
    SolverBlowUpError,
)
from mzfaber.mz_kernels import kernel_table

logger = logging.getLogger(__name__)


class Startup(Enum):
    RK4 = 'rk4'


@dataclass(frozen=True)
class SolverConfig:
    dt: float = config.DEFAULT_DT
    t_final: float = config.DEFAULT_T_FINAL
    startup: Startup = Startup.RK4

    def __post_init__(self):
        if not self.dt > 0 or not self.t_final > 0:
            raise DimensionError(f"dt e t_final precisam ser positivos: dt={self.dt}, t_final={self.t_final}")
        ratio = self.t_final / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise DimensionError(f"t_final/dt = {ratio} não é um número inteiro de passos")

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class Trajectory:
    """Valores y(t_k) numa grade uniforme; `stderr` só para médias de Monte Carlo."""

    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise DimensionError(f"Tempos {times.shape} e valores {values.shape} incompatíveis")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("Trajetória com valores não finitos")
        if times.size > 2:
            steps = np.diff(times)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise GridMismatchError("Grade de tempos não uniforme")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)
        if self.stderr is not None:
            object.__setattr__(self, 'stderr', np.asarray(self.stderr, dtype=float))

    def __len__(self):
        return self.times.size

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def subsample(self, stride):
        if stride < 1:
            raise DimensionError(f"Passo de subamostragem inválido: {stride}")
        stderr = None if self.stderr is None else self.stderr[::stride]
        return Trajectory(self.times[::stride], self.values[::stride], stderr)

    def at(self, times):
        """Valores nos tempos pedidos, que precisam cair sobre a grade."""
        times = np.asarray(times, dtype=float)
        if self.times.size < 2:
            raise GridMismatchError("Trajetória com menos de dois pontos")
        position = (times - self.times[0]) / self.dt
        index = np.rint(position).astype(int)
        if np.any(np.abs(position - index) > 1e-6) or np.any(index < 0) or np.any(index >= self.times.size):
            raise GridMismatchError("Tempos pedidos fora da grade da trajetória")
        return self.values[index]

    def on_grid(self, output_dt):
        """Subamostra para a grade de saída output_dt (múltiplo inteiro de dt)."""
        stride = output_dt / self.dt
        if abs(stride - round(stride)) > 1e-6:
            raise GridMismatchError(f"output_dt = {output_dt} não é múltiplo de dt = {self.dt}")
        return self.subsample(int(round(stride)))


def _march(rhs, y0, cfg):
    """
    Marcha comum ao integrador de EDO e ao da GLE.

    rhs(k, c, y_stage, history) devolve a derivada em t_k + c dt, com
    history = y_0..y_k.
    """
    dt = cfg.dt
    n = cfg.n_steps
    y = np.zeros(n + 1)
    derivs = np.zeros(n + 1)
    y[0] = y0
    for k in range(n):
        history = y[: k + 1]
        if k < 2:
            k1 = rhs(k, 0.0, y[k], history)
            k2 = rhs(k, 0.5, y[k] + 0.5 * dt * k1, history)
            k3 = rhs(k, 0.5, y[k] + 0.5 * dt * k2, history)
            k4 = rhs(k, 1.0, y[k] + dt * k3, history)
            derivs[k] = k1
            y[k + 1] = y[k] + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        else:
            derivs[k] = rhs(k, 0.0, y[k], history)
            y[k + 1] = y[k] + dt * (23.0 * derivs[k] - 16.0 * derivs[k - 1] + 5.0 * derivs[k - 2]) / 12.0
        if not np.isfinite(y[k + 1]):
            raise SolverBlowUpError(f"Solução divergiu no passo {k + 1} (t = {(k + 1) * dt:.6g})", last_valid_step=k)
    return Trajectory(cfg.times, y)


def integrate_ode_ab3(rhs, y0, cfg):
    """AB3 com partida RK4 para dy/dt = rhs(t, y)."""
    dt = cfg.dt
    return _march(lambda k, c, ys, history: rhs((k + c) * dt, ys), y0, cfg)


class _MemoryTerms:
    """Tabelas g(k dt), f(k dt) e a integral acumulada de f, calculadas uma vez."""

    def __init__(self, kernel, cfg):
        self.kernel = kernel
        self.dt = cfg.dt
        self.g, self.f = kernel_table(kernel, cfg.times)
        self.forcing = scipy.integrate.cumulative_trapezoid(self.f, dx=cfg.dt, initial=0.0)
        self._half = {}

    def _half_offsets(self, k):
        # g e f em (k - m + 1/2) dt, só usados na partida RK4
        if k not in self._half:
            offsets = (np.arange(k, -1, -1) + 0.5) * self.dt
            self._half[k] = kernel_table(self.kernel, offsets)
        return self._half[k]

    def memory(self, k, c, y_stage, history):
        dt = self.dt
        if c == 0.0:
            g_hist = self.g[k::-1]
            g_stage = self.g[0]
        elif c == 1.0:
            g_hist = self.g[k + 1:0:-1]
            g_stage = self.g[0]
        else:
            g_hist = self._half_offsets(k)[0]
            g_stage = self.g[0]
        # trapézio sobre t_0..t_k e depois o trecho [t_k, t_k + c dt]
        total = 0.0
        if k >= 1:
            total = dt * (0.5 * g_hist[0] * history[0] + g_hist[1:k] @ history[1:k] + 0.5 * g_hist[k] * history[k])
        if c != 0.0:
            total += 0.5 * c * dt * (g_hist[k] * history[k] + g_stage * y_stage)
        return total

    def forcing_at(self, k, c):
        if c == 0.0:
            return self.forcing[k]
        if c == 1.0:
            return self.forcing[k + 1]
        f_stage = self._half_offsets(k)[1][0]
        return self.forcing[k] + 0.5 * c * self.dt * (self.f[k] + f_stage)


def solve_gle(model, y0, cfg):
    """
    Integra a GLE do modelo reduzido a partir de y(0) = y0.

    Args:
        model (ReducedModel): a, b e o núcleo de memória
        y0 (float): Condição inicial
        cfg (SolverConfig): Passo, horizonte e partida

    Returns:
        Trajectory: y(t_k), k = 0..K

    Raises:
        SolverBlowUpError: se a solução deixar de ser finita
    """
    terms = _MemoryTerms(model.kernel, cfg)
    logger.debug(f"GLE: {cfg.n_steps} passos, dt={cfg.dt}, família {model.kernel.family.value} ordem {model.kernel.order}")

    def rhs(k, c, y_stage, history):
        memory = terms.memory(k, c, y_stage, history)
        forcing = terms.forcing_at(k, c)
        return model.a * y_stage + model.b + memory + forcing

    return _march(rhs, y0, cfg)


def observed_order(model, y0, cfg_sequence, reference=None):
    """
    Ordem de convergência observada numa sequência geométrica de passos.

    Com `reference` (função t -> y exata) usa o erro máximo na grade mais
    grossa; sem ela, as diferenças entre soluções sucessivas (Richardson).
    Devolve a estimativa do par mais fino.

    Raises:
        InconclusiveOrderError: se os erros não decrescerem monotonamente
    """
    cfgs = sorted(cfg_sequence, key=lambda c: -c.dt)
    if len(cfgs) < 3:
        raise DimensionError("São necessários pelo menos três passos")
    ratios = [cfgs[i].dt / cfgs[i + 1].dt for i in range(len(cfgs) - 1)]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise DimensionError(f"Passos não formam sequência geométrica: razões {ratios}")

    coarse = cfgs[0].times
    solutions = [solve_gle(model, y0, cfg).at(coarse) for cfg in cfgs]
    if reference is not None:
        exact = np.asarray(reference(coarse), dtype=float)
        errors = [np.max(np.abs(sol - exact)) for sol in solutions]
    else:
        errors = [np.max(np.abs(a - b)) for a, b in zip(solutions, solutions[1:])]

    if any(later >= earlier for earlier, later in zip(errors, errors[1:])) or min(errors) == 0:
        raise InconclusiveOrderError(f"Sequência de erros não monótona: {errors}")

    orders = [np.log(errors[i] / errors[i + 1]) / np.log(ratios[0]) for i in range(len(errors) - 1)]
    logger.info(f"Ordens observadas: {[round(o, 3) for o in orders]}")
    return float(orders[-1])
