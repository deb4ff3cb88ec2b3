"""
Polinômios de Faber para o mapa conforme elíptico psi(w) = w + c0 + c1/w.

Ajuste da elipse ao espectro, recorrência de três termos, modos temporais
a_j(t), aproximação truncada de e^{tm}v e a cota de convergência da
expansão.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from mzfaber import config
from mzfaber.errors import BoundDomainError, DimensionError, EllipseMapError
from mzfaber.matrix_core import (
    SpectralBox,
    as_matrix,
    log_norm,
    numerical_radius,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EllipseMap:
    """
    Parâmetros do mapa conforme psi(w) = w + c0 + c1/w.

    O círculo |w| = capacity é levado na elipse de centro c0 e semi-eixos
    (semi_real, semi_imag). c1 = (semi_real^2 - semi_imag^2)/4 é negativo
    quando o eixo imaginário domina, que é o caso dos espectros de cadeias.
    """

    c0: float
    c1: float
    capacity: float
    semi_real: float
    semi_imag: float

    @classmethod
    def from_axes(cls, c0, semi_real, semi_imag):
        if semi_real < 0 or semi_imag < 0 or semi_real + semi_imag <= 0:
            raise EllipseMapError(f"Semi-eixos inválidos: ({semi_real}, {semi_imag})")
        return cls(
            c0=float(c0),
            c1=float((semi_real ** 2 - semi_imag ** 2) / 4.0),
            capacity=float((semi_real + semi_imag) / 2.0),
            semi_real=float(semi_real),
            semi_imag=float(semi_imag),
        )

    def psi(self, w):
        return w + self.c0 + self.c1 / w

    def as_dict(self):
        return {
            'c0': self.c0,
            'c1': self.c1,
            'capacity': self.capacity,
            'semi_real': self.semi_real,
            'semi_imag': self.semi_imag,
        }


@dataclass(frozen=True)
class FaberCoeffs:
    """Modos temporais a_0(t)..a_n(t) da expansão de e^{tz}."""

    order: int
    t: float
    values: np.ndarray


@dataclass(frozen=True)
class BoundConstants:
    """
    Constantes da cota R(t, n).

    q: raio do disco centrado na origem que contém o campo de valores
    K: constante multiplicativa (||P|| C6 W, com ||P|| = W = 1)
    beta: taxa de crescimento do semigrupo (norma logarítmica)
    E: 1 + psi(gamma)
    """

    q: float
    K: float
    beta: float
    E: float
    C3: float = 0.0
    C3_star: float = 0.0
    C4: float = 0.0
    C5: float = 0.0
    C6: float = 0.0


def fit_ellipse(spectrum, padding=None):
    """
    Ajusta a elipse do mapa conforme ao espectro.

    O centro é o ponto médio da extensão real e os semi-eixos vêm da caixa
    espectral. Eixos degenerados recebem o piso ELLIPSE_AXIS_FLOOR * max(1, outro eixo).
    Se algum autovalor cair fora da elipse inscrita na caixa (cantos), os dois
    eixos são ampliados na mesma proporção; o padding é aplicado por último.

    Args:
        spectrum (Spectrum): Autovalores a envolver
        padding (float): Folga relativa dos semi-eixos (padrão ELLIPSE_PADDING)

    Returns:
        EllipseMap: Mapa ajustado
    """
    padding = config.ELLIPSE_PADDING if padding is None else padding
    if padding < 0:
        raise EllipseMapError(f"Padding negativo: {padding}")
    lam = np.asarray(spectrum.eigenvalues, dtype=complex)
    if lam.size == 0:
        raise EllipseMapError("Espectro vazio, não há elipse a ajustar")

    box = SpectralBox.from_spectrum(spectrum, symmetric=True)
    c0 = 0.5 * (box.re_min + box.re_max)
    alpha = 0.5 * (box.re_max - box.re_min)
    beta = box.im_max

    floor = config.ELLIPSE_AXIS_FLOOR
    if alpha < floor * max(1.0, beta):
        alpha = floor * max(1.0, beta)
    if beta < floor * max(1.0, alpha):
        beta = floor * max(1.0, alpha)

    reach = np.sqrt(((lam.real - c0) / alpha) ** 2 + (lam.imag / beta) ** 2)
    scale = max(1.0, float(np.max(reach)))
    if scale > 1.0:
        logger.debug(f"Elipse ampliada por {scale:.4f} para conter os cantos do espectro")

    ellipse = EllipseMap.from_axes(c0, alpha * scale * (1.0 + padding), beta * scale * (1.0 + padding))
    logger.debug(f"Elipse ajustada: {ellipse.as_dict()}")
    return ellipse


def contains(ellipse, z, slack=None):
    """Verifica se todos os pontos z estão na elipse fechada."""
    slack = config.HULL_SLACK if slack is None else slack
    z = np.asarray(z, dtype=complex)
    reach = ((z.real - ellipse.c0) / ellipse.semi_real) ** 2 + (z.imag / ellipse.semi_imag) ** 2
    return bool(np.all(reach <= 1.0 + slack))


def bessel_j(order, x):
    """Função de Bessel de primeira espécie J_order(x)."""
    return scipy.special.jv(order, x)


def faber_modes(ellipse, t, n):
    """
    Calcula os modos temporais a_j(t), j = 0..n.

    Para c1 < 0, a_j(t) = e^{t c0} J_j(2t sqrt(-c1)) / sqrt(-c1)^j, avaliado na
    forma equivalente e^{t c0} t^j/j! 0F1(; j+1; c1 t^2), que não sofre
    underflow quando sqrt(-c1) é pequeno. Para |c1| abaixo de
    TAYLOR_LIMIT_THRESHOLD usa o limite de Taylor e^{t c0} t^j/j!.

    Raises:
        EllipseMapError: para c1 > 0 (argumento imaginário, Bessel modificada)
    """
    if n < 0:
        raise DimensionError(f"Ordem negativa: {n}")
    if not np.isfinite(t):
        raise EllipseMapError(f"Tempo não finito: {t}")
    c1 = ellipse.c1
    if c1 > config.TAYLOR_LIMIT_THRESHOLD:
        raise EllipseMapError(
            f"c1 = {c1:.3e} > 0 (elipse dominada pelo eixo real) não é suportado nos modos de Bessel"
        )

    j = np.arange(n + 1)
    if t == 0:
        return FaberCoeffs(order=n, t=0.0, values=(j == 0).astype(float))
    # e^{t c0} t^j / j! em escala logarítmica
    taylor = np.exp(t * ellipse.c0 + j * np.log(abs(t)) - scipy.special.gammaln(j + 1)) * np.sign(t) ** j
    if abs(c1) < config.TAYLOR_LIMIT_THRESHOLD:
        values = taylor
    else:
        values = taylor * scipy.special.hyp0f1(j + 1.0, c1 * t * t)

    if not np.all(np.isfinite(values)):
        raise EllipseMapError(f"Modos de Faber não finitos em t = {t}")
    return FaberCoeffs(order=n, t=float(t), values=values)


def faber_modes_quadrature(ellipse, t, n, radius=None, n_nodes=256):
    """
    Modos a_j(t) pela integral de contorno em |w| = radius (padrão 2*gamma).

    a_j(t) = (1/2 pi i) contorno e^{t psi(w)} w^{-j-1} dw, regra do trapézio com
    n_nodes pontos, o que equivale a uma FFT dos valores no círculo.
    """
    radius = 2.0 * ellipse.capacity if radius is None else radius
    if radius < ellipse.capacity:
        raise EllipseMapError(f"Raio {radius} menor que a capacidade {ellipse.capacity}")
    if n_nodes <= n:
        raise DimensionError("n_nodes precisa exceder a ordem")
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    w = radius * np.exp(1j * theta)
    samples = np.exp(t * ellipse.psi(w))
    coeffs = np.fft.fft(samples)[: n + 1] / n_nodes
    values = (coeffs / radius ** np.arange(n + 1)).real
    return FaberCoeffs(order=n, t=float(t), values=values)


def faber_scalar(ellipse, z, n):
    """Valores escalares F_0(z)..F_n(z) pela mesma recorrência."""
    z = complex(z)
    values = np.zeros(n + 1, dtype=complex)
    values[0] = 1.0
    if n >= 1:
        values[1] = z - ellipse.c0
    if n >= 2:
        values[2] = (z - ellipse.c0) * values[1] - 2.0 * ellipse.c1
    for j in range(3, n + 1):
        values[j] = (z - ellipse.c0) * values[j - 1] - ellipse.c1 * values[j - 2]
    if abs(z.imag) == 0:
        return values.real
    return values


def faber_recurrence_apply(ellipse, m, v, n):
    """
    Vetores F_0(m)v..F_n(m)v, um produto matriz-vetor por passo.

    Com o mapa de dois termos a recorrência geral fica
    F_0 = 1, F_1 = z - c0, F_2 = (z - c0)^2 - 2 c1 e
    F_j = (z - c0) F_{j-1} - c1 F_{j-2} para j >= 3
    (o termo extra da recorrência geral some porque c_j = 0 para j >= 2).

    Returns:
        numpy.ndarray: Matriz (n+1) x dim, linha j = F_j(m) v
    """
    m = as_matrix(m, square=True)
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != m.shape[0]:
        raise DimensionError(f"Vetor de tamanho {v.shape} incompatível com {m.shape}")
    if n < 0:
        raise DimensionError(f"Ordem negativa: {n}")

    c0, c1 = ellipse.c0, ellipse.c1
    out = np.zeros((n + 1, v.shape[0]))
    out[0] = v
    if n >= 1:
        out[1] = m @ v - c0 * v
    if n >= 2:
        out[2] = m @ out[1] - c0 * out[1] - 2.0 * c1 * out[0]
    for j in range(3, n + 1):
        out[j] = m @ out[j - 1] - c0 * out[j - 1] - c1 * out[j - 2]
    return out


def expm_faber(ellipse, m, t, v, order):
    """Aproximação de Faber de ordem `order` para e^{tm}v."""
    modes = faber_modes(ellipse, t, order)
    return modes.values @ faber_recurrence_apply(ellipse, m, v, order)


def estimate_bound_constants(ellipse, reduced, x1=1.0, generator=None):
    """
    Calcula as constantes (q, K, beta, E) da cota de convergência.

    Args:
        ellipse (EllipseMap): Mapa ajustado ao espectro de M11^T
        reduced: Dados reduzidos (M11, avec, bvec, mean_rest)
        x1 (float): Valor do observável resolvido
        generator (array_like): Gerador cuja norma logarítmica dá beta (padrão M11^T)

    Returns:
        BoundConstants: As constantes da cota
    """
    m_t = as_matrix(reduced.M11).T
    q = max(numerical_radius(m_t), ellipse.capacity)
    beta = log_norm(m_t if generator is None else generator)

    avec = np.asarray(reduced.avec, dtype=float)
    c3 = 8.0 * math.e * np.linalg.norm(avec) * q * (1.0 + 1.0 / (8.0 * q))
    c3_star = 8.0 * math.e * np.linalg.norm(m_t @ avec) * q * (1.0 + 1.0 / (8.0 * q))
    c4 = float(np.linalg.norm(reduced.bvec) * abs(x1))
    c5 = float(np.linalg.norm(reduced.mean_rest))
    c6 = 2.0 * max(c4 * c3, c5 * c3_star)
    exponent = 1.0 + float(np.real(ellipse.psi(ellipse.capacity)))

    constants = BoundConstants(
        q=float(q), K=float(c6), beta=float(beta), E=exponent,
        C3=float(c3), C3_star=float(c3_star), C4=c4, C5=c5, C6=float(c6),
    )
    logger.debug(f"Constantes da cota: q={constants.q:.4f} K={constants.K:.4e} beta={constants.beta:.4f}")
    return constants


def convergence_bound(ellipse, params, t, n):
    """
    Cota R(t, n) = K (q/(n+1))^n (e^{t beta} - e^{t(E+n)}) / (beta - E - n).

    Válida para n >= 4q. Em t = 0 vale 0; quando beta = E + n usa o limite
    t e^{t beta}. E = 1 + psi(gamma) vem de `params`, calculado a partir de `ellipse`.

    Raises:
        BoundDomainError: se n < 4q ou t < 0
    """
    if n < 4.0 * params.q:
        raise BoundDomainError(f"Ordem n = {n} abaixo de 4q = {4.0 * params.q:.3f}")
    if t < 0:
        raise BoundDomainError(f"Tempo negativo: {t}")
    if t == 0:
        return 0.0

    gap = params.beta - params.E - n
    if abs(gap) < 1e-12 * max(1.0, abs(params.beta)):
        time_factor = t * math.exp(t * params.beta)
    else:
        time_factor = math.exp(t * params.beta) * -math.expm1(t * (params.E + n - params.beta)) / gap
    log_prefactor = math.log(params.K) + n * math.log(params.q / (n + 1)) if params.K > 0 else -math.inf
    return math.exp(log_prefactor) * time_factor


def dyson_bound(growth, constant, t, n):
    """Cota da série de Dyson F(t, n) = C (A t)^n / (n+1)!."""
    if n < 0 or t < 0:
        raise BoundDomainError(f"Argumentos fora do domínio: t = {t}, n = {n}")
    if t == 0 or growth == 0:
        return 0.0 if n > 0 else float(constant)
    return float(constant * math.exp(n * math.log(growth * t) - scipy.special.gammaln(n + 2)))
