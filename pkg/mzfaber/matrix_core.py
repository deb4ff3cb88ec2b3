"""
Núcleo de álgebra linear densa.

As matrizes são `numpy.ndarray` bidimensionais de reais (linha-major, como o
numpy já guarda). As rotinas pesadas vêm do scipy: `expm` é o
scaling-and-squaring com aproximante de Padé, `eigvals` é a redução de
Hessenberg seguida do QR com deslocamentos do LAPACK.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from mzfaber import config
from mzfaber.errors import (
    DimensionError,
    EigenvalueConvergenceError,
    MatrixOverflowError,
    NonFiniteError,
)

logger = logging.getLogger(__name__)


def as_matrix(m, square=False):
    """
    Valida e converte a entrada em matriz densa real.

    Args:
        m (array_like): Matriz de entrada
        square (bool): Se a matriz precisa ser quadrada

    Returns:
        numpy.ndarray: Matriz 2D de floats
    """
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"Esperava matriz 2D, recebi {arr.ndim} dimensões")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"Matriz não quadrada: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("Matriz contém entradas não finitas")
    return arr


def _as_vector(v, size):
    vec = np.asarray(v)
    if vec.ndim != 1 or vec.shape[0] != size:
        raise DimensionError(f"Vetor de tamanho {vec.shape} incompatível com dimensão {size}")
    return vec


@dataclass(frozen=True)
class Spectrum:
    """Autovalores (com multiplicidade) de uma matriz."""

    eigenvalues: np.ndarray
    valid: bool = True

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def radius(self):
        if len(self.eigenvalues) == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def is_conjugate_closed(self, tol=None):
        """Verifica se cada autovalor tem o seu conjugado no espectro."""
        tol = config.CONJUGATE_PAIR_TOL if tol is None else tol
        scale = max(1.0, self.radius)
        remaining = list(self.eigenvalues)
        while remaining:
            lam = remaining.pop()
            if abs(lam.imag) <= tol * scale:
                continue
            gaps = [abs(mu - np.conj(lam)) for mu in remaining]
            if not gaps or min(gaps) > tol * scale:
                return False
            remaining.pop(int(np.argmin(gaps)))
        return True

    def ordered(self):
        """Ordem determinística: parte real decrescente, parte imaginária crescente."""
        lam = self.eigenvalues
        idx = np.lexsort((lam.imag, -lam.real))
        return Spectrum(lam[idx], self.valid)


@dataclass(frozen=True)
class SpectralBox:
    """Caixa alinhada aos eixos que contém o espectro."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @classmethod
    def from_spectrum(cls, spectrum, symmetric=True):
        lam = np.asarray(spectrum.eigenvalues, dtype=complex)
        if lam.size == 0:
            raise DimensionError("Espectro vazio")
        im_max = float(np.max(lam.imag))
        im_min = float(np.min(lam.imag))
        if symmetric:
            im_max = float(np.max(np.abs(lam.imag)))
            im_min = -im_max
        return cls(float(np.min(lam.real)), float(np.max(lam.real)), im_min, im_max)

    def contains(self, z, slack=None):
        slack = config.HULL_SLACK if slack is None else slack
        z = np.asarray(z, dtype=complex)
        return bool(np.all(
            (z.real >= self.re_min - slack) & (z.real <= self.re_max + slack)
            & (z.imag >= self.im_min - slack) & (z.imag <= self.im_max + slack)
        ))


def mat_vec(m, v):
    m = as_matrix(m)
    return m @ _as_vector(v, m.shape[1])


def poly_apply(m, coeffs, v):
    """
    Calcula sum_j coeffs[j] m^j v pelo esquema de Horner, sem formar potências de m.

    Args:
        m (array_like): Matriz quadrada
        coeffs (sequence): Coeficientes beta_0..beta_k
        v (array_like): Vetor

    Returns:
        numpy.ndarray: O vetor resultante
    """
    m = as_matrix(m, square=True)
    v = _as_vector(v, m.shape[0])
    coeffs = np.atleast_1d(np.asarray(coeffs))
    if coeffs.size == 0:
        raise DimensionError("Polinômio sem coeficientes")
    result = coeffs[-1] * v
    for beta in coeffs[-2::-1]:
        result = m @ result + beta * v
    return result


def expm_apply(m, t, v):
    """
    Aplica e^{tm} a um vetor (ou às colunas de uma matriz).

    Raises:
        MatrixOverflowError: se t*m for grande demais para a exponencial
    """
    m = as_matrix(m, square=True)
    if not np.isfinite(t):
        raise NonFiniteError(f"Tempo não finito: {t}")
    v = np.asarray(v)
    if v.shape[0] != m.shape[0]:
        raise DimensionError(f"Vetor de tamanho {v.shape} incompatível com {m.shape}")
    if t == 0:
        return np.array(v, dtype=float, copy=True)
    with np.errstate(over='ignore', invalid='ignore'):
        try:
            propagator = scipy.linalg.expm(t * m)
        except (OverflowError, ValueError) as e:
            raise MatrixOverflowError(f"Overflow em expm para t*||m|| = {abs(t) * np.linalg.norm(m, 1):.3e}: {e}") from e
        result = propagator @ v
    if not np.all(np.isfinite(result)):
        raise MatrixOverflowError(
            f"Overflow em expm para t*||m||_1 = {abs(t) * np.linalg.norm(m, 1):.3e}"
        )
    return result


def eigenvalues(m):
    """
    Autovalores de uma matriz não simétrica.

    Raises:
        EigenvalueConvergenceError: se o QR não convergir
    """
    m = as_matrix(m, square=True)
    try:
        lam = scipy.linalg.eigvals(m, check_finite=False)
    except np.linalg.LinAlgError as e:
        partial = Spectrum(np.full(m.shape[0], np.nan, dtype=complex), valid=False)
        raise EigenvalueConvergenceError(f"QR não convergiu: {e}", partial=partial) from e
    return Spectrum(np.asarray(lam, dtype=complex))


def check_spectrum(m, spectrum=None):
    """
    Valida um espectro e devolve o maior resíduo relativo min_w ||m w - lambda w|| / ||m||.

    O resíduo mínimo sobre vetores unitários é o menor valor singular de m - lambda I.
    Um aviso é registrado quando o resíduo excede EIG_RESIDUAL_TOL.
    """
    m = as_matrix(m, square=True)
    if spectrum is None:
        spectrum = eigenvalues(m)
    norm = max(np.linalg.norm(m, 2), np.finfo(float).tiny)
    eye = np.eye(m.shape[0])
    worst = 0.0
    for lam in spectrum.eigenvalues:
        sigma_min = scipy.linalg.svdvals(m - lam * eye)[-1]
        worst = max(worst, float(sigma_min / norm))
    if worst > config.EIG_RESIDUAL_TOL:
        logger.warning(f"Resíduo de autopar {worst:.2e} acima da tolerância {config.EIG_RESIDUAL_TOL:.0e}")
    return worst


def spectral_hull(m):
    """Caixa que contém o espectro de m, simétrica na parte imaginária (m é real)."""
    return SpectralBox.from_spectrum(eigenvalues(m), symmetric=True)


def log_norm(m):
    """Norma logarítmica espectral: maior autovalor da parte simétrica."""
    m = as_matrix(m, square=True)
    return float(scipy.linalg.eigvalsh(0.5 * (m + m.T))[-1])


def numerical_radius(m, n_angles=360):
    """
    Raio do campo de valores FV(m), estimado por max_theta lambda_max(Re(e^{i theta} m)).

    A varredura em theta dá uma cota inferior que converge com n_angles.
    """
    m = as_matrix(m, square=True)
    radius = 0.0
    for theta in np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False):
        rotated = np.exp(1j * theta) * m
        hermitian = 0.5 * (rotated + rotated.conj().T)
        radius = max(radius, float(scipy.linalg.eigvalsh(hermitian)[-1]))
    return radius
