"""
Redução de Mori-Zwanzig de sistemas lineares e expansões do núcleo de memória.

Para dx/dt = A x e o observável x_1 (após a permutação), a projeção de
Chorin dá

    P L x_1 = a x_1 + b,   a = A_11,   b = avec . <x_-1(0)>

e os coeficientes do operador de memória reduzem-se a produtos vetoriais
com polinômios de M11^T:

    g_j = bvec . p_j(M11^T) avec
    f_j = [p_j(M11^T) M11^T avec] . <x_-1(0)>

onde avec é a primeira linha de A sem a diagonal, bvec a primeira coluna e
M11 a matriz sem a primeira linha e coluna. Cada família (Dyson, Faber,
Lagrange, Newton) escolhe os polinômios p_j e os modos temporais h_j(t).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.special

from mzfaber import config
from mzfaber.errors import (
    DimensionError,
    NearDegenerateSpectrumError,
    ProjectionError,
    UnsupportedFamilyError,
)
from mzfaber.faber_poly import contains, faber_modes, faber_recurrence_apply, fit_ellipse
from mzfaber.matrix_core import Spectrum, as_matrix, eigenvalues, expm_apply, mat_vec

logger = logging.getLogger(__name__)


class StatsKind(Enum):
    CHORIN_INITIAL = 'chorin'
    BERNE_EQUILIBRIUM_QUADRATIC = 'berne'


class Family(Enum):
    DYSON = 'dyson'
    FABER = 'faber'
    LAGRANGE = 'lagrange'
    NEWTON = 'newton'


@dataclass(frozen=True)
class SystemSpec:
    """
    Sistema linear dx/dt = A x com a média inicial <x(0)> sob rho_0.

    Para BERNE_EQUILIBRIUM_QUADRATIC o sistema precisa ser uma cadeia
    hamiltoniana duplicada, bloco p antes do bloco q.
    """

    A: np.ndarray
    init_mean: np.ndarray
    stats_kind: StatsKind = StatsKind.CHORIN_INITIAL
    label: str = ''

    def __post_init__(self):
        matrix = as_matrix(self.A, square=True)
        mean = np.asarray(self.init_mean, dtype=float)
        if mean.shape != (matrix.shape[0],):
            raise DimensionError(f"Média inicial de tamanho {mean.shape}, esperado ({matrix.shape[0]},)")
        object.__setattr__(self, 'A', matrix)
        object.__setattr__(self, 'init_mean', mean)

    @property
    def dim(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class ReducedData:
    a: float
    b: float
    M11: np.ndarray
    avec: np.ndarray
    bvec: np.ndarray
    mean_rest: np.ndarray
    index: int = 1
    projection: StatsKind = StatsKind.CHORIN_INITIAL

    @property
    def generator(self):
        """M11^T, o gerador que aparece em todos os coeficientes."""
        return self.M11.T


@dataclass(frozen=True)
class KernelExpansion:
    """
    Coeficientes g_j, f_j de uma família e os parâmetros dos modos temporais.

    mode_params é um EllipseMap (Faber), o Spectrum de M11^T (Lagrange,
    Newton; para Newton já na ordem dos nós) ou None (Dyson). Nas famílias
    espectrais os coeficientes são complexos e os pares conjugados se
    combinam na parte real da soma.
    """

    family: Family
    order: int
    g: np.ndarray
    f: np.ndarray
    mode_params: object = None

    def __post_init__(self):
        if len(self.g) != self.order + 1 or len(self.f) != self.order + 1:
            raise DimensionError(
                f"Coeficientes com tamanhos ({len(self.g)}, {len(self.f)}) para ordem {self.order}"
            )


@dataclass(frozen=True)
class ReducedModel:
    """Tudo o que a GLE escalar precisa: a, b e o núcleo."""

    a: float
    b: float
    kernel: KernelExpansion
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_reduced(cls, reduced, kernel):
        return cls(a=reduced.a, b=reduced.b, kernel=kernel,
                   metadata={'index': reduced.index, 'projection': reduced.projection.value})


def reduce(system, observable_index):
    """
    Reduz o sistema para o observável x_{observable_index} (índice 1-based).

    O observável é permutado para a primeira posição, as demais coordenadas
    mantêm a ordem original.

    Args:
        system (SystemSpec): Sistema linear e estatística inicial
        observable_index (int): Índice 1-based do observável

    Returns:
        ReducedData: a, b, M11, avec, bvec e a média das coordenadas não resolvidas
    """
    n = system.dim
    if not 1 <= observable_index <= n:
        raise ProjectionError(f"Índice de observável {observable_index} fora de 1..{n}")

    k = observable_index - 1
    perm = [k] + [i for i in range(n) if i != k]
    permuted = system.A[np.ix_(perm, perm)]
    mean = system.init_mean[perm]

    a = float(permuted[0, 0])
    avec = permuted[0, 1:].copy()
    bvec = permuted[1:, 0].copy()
    m11 = permuted[1:, 1:].copy()

    if system.stats_kind is StatsKind.BERNE_EQUILIBRIUM_QUADRATIC:
        from mzfaber.models import is_hamiltonian_chain

        if not is_hamiltonian_chain(system.A):
            raise ProjectionError("Projeção de Berne exige cadeia hamiltoniana (bloco p antes do bloco q)")
        if k >= n // 2:
            raise ProjectionError(
                f"Projeção de Berne exige observável de momento (índice <= {n // 2}), recebido {observable_index}"
            )
        mean_rest = np.zeros(n - 1)
        b = 0.0
    else:
        mean_rest = mean[1:].copy()
        b = float(avec @ mean_rest)

    logger.debug(f"Redução do observável {observable_index}: a={a:.6g} b={b:.6g} dim(M11)={n - 1}")
    return ReducedData(a=a, b=b, M11=m11, avec=avec, bvec=bvec, mean_rest=mean_rest,
                       index=observable_index, projection=system.stats_kind)


def dyson_coeffs(r, n):
    """g_j = bvec . (M11^T)^j avec e f_j = ((M11^T)^{j+1} avec) . mean, j = 0..n."""
    if n < 0:
        raise DimensionError(f"Ordem negativa: {n}")
    m = r.generator
    g = np.zeros(n + 1)
    f = np.zeros(n + 1)
    w = r.avec
    for j in range(n + 1):
        g[j] = r.bvec @ w
        w = mat_vec(m, w)
        f[j] = r.mean_rest @ w
    return KernelExpansion(Family.DYSON, n, g, f)


def faber_coeffs(r, ellipse=None, n=10):
    """
    Coeficientes de Faber g_j = bvec . F_j(M11^T) avec e f_j = [F_j(M11^T) M11^T avec] . mean.

    Sem elipse, ajusta uma ao espectro de M11^T. Se o espectro não couber na
    elipse dada, registra um aviso e segue.
    """
    m = r.generator
    spectrum = eigenvalues(m)
    if ellipse is None:
        ellipse = fit_ellipse(spectrum)
    elif not contains(ellipse, spectrum.eigenvalues):
        logger.warning("Espectro de M11^T fora da elipse de Faber; a série pode não convergir")

    g = faber_recurrence_apply(ellipse, m, r.avec, n) @ r.bvec
    f = faber_recurrence_apply(ellipse, m, mat_vec(m, r.avec), n) @ r.mean_rest
    return KernelExpansion(Family.FABER, n, g, f, mode_params=ellipse)


def _check_full_order(r, n_full):
    dim = r.M11.shape[0]
    if dim == 0:
        raise DimensionError("Sistema sem coordenadas não resolvidas")
    if n_full is not None and n_full != dim:
        raise DimensionError(f"Expansão espectral usa todo o espectro: n_full = {dim}, recebido {n_full}")
    return dim


def lagrange_coeffs(r, n_full=None):
    """
    Coeficientes de Lagrange com projetores espectrais de M11^T.

    O polinômio de Lagrange do autovalor lambda_j avaliado em M11^T é o
    projetor espectral v_j w_j^H / (w_j^H v_j), com v_j, w_j autovetores à
    direita e à esquerda. Modo temporal h_j(t) = e^{lambda_j t}.

    Raises:
        NearDegenerateSpectrumError: se dois autovalores distam menos que
            DEGENERATE_GAP vezes o raio espectral
    """
    dim = _check_full_order(r, n_full)
    m = r.generator
    lam, left, right = scipy.linalg.eig(m, left=True, right=True)

    radius = max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    if dim > 1:
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(dim, np.inf))
        if np.min(gaps) < config.DEGENERATE_GAP * radius:
            raise NearDegenerateSpectrumError(
                f"Autovalores quase degenerados (gap {np.min(gaps):.2e}); use a família Newton"
            )

    normalization = np.einsum('ij,ij->j', left.conj(), right)
    weights = (left.conj().T @ r.avec) / normalization
    g = (r.bvec @ right) * weights
    f = (r.mean_rest @ right) * weights * lam
    return KernelExpansion(Family.LAGRANGE, dim - 1, g, f, mode_params=Spectrum(lam))


def newton_coeffs(r, n_full=None):
    """
    Coeficientes de Newton g_j = bvec . prod_{k<j}(M11^T - lambda_k I) avec.

    Nós ordenados por parte real decrescente e parte imaginária crescente.
    O modo temporal j é a diferença dividida de e^{tz} nos nós 0..j.
    """
    dim = _check_full_order(r, n_full)
    m = r.generator
    nodes = eigenvalues(m).ordered()
    g = np.zeros(dim, dtype=complex)
    f = np.zeros(dim, dtype=complex)
    w = r.avec.astype(complex)
    for j in range(dim):
        mw = m @ w
        g[j] = r.bvec @ w
        f[j] = r.mean_rest @ mw
        w = mw - nodes.eigenvalues[j] * w
    return KernelExpansion(Family.NEWTON, dim - 1, g, f, mode_params=nodes)


def exp_divided_differences(nodes, t):
    """
    Diferenças divididas e^{t.}[lambda_0..lambda_j], j = 0..n-1.

    Nós bem separados usam a recursão clássica. Quando dois nós estão a
    menos de CONFLUENT_TOL, ou quando a recursão amplificaria o erro de
    arredondamento além de 1e-12, usa a forma de Opitz: primeira linha de
    expm(t (diag(lambda) + superdiagonal de uns)), que dá o limite confluente
    (por exemplo t e^{lambda t} para dois nós iguais).
    """
    nodes = np.asarray(nodes, dtype=complex)
    n = nodes.size
    use_opitz = False
    if n > 1:
        gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.diag(np.full(n, np.inf))
        min_gap = float(np.min(gaps))
        if min_gap < config.CONFLUENT_TOL:
            use_opitz = True
        else:
            amplification = (n - 1) * np.log(2.0 / min_gap) + np.log(np.finfo(float).eps)
            use_opitz = amplification > np.log(1e-12)

    if use_opitz:
        bidiagonal = np.diag(nodes) + np.diag(np.ones(n - 1), 1)
        return scipy.linalg.expm(t * bidiagonal)[0]

    table = np.exp(t * nodes)
    out = np.zeros(n, dtype=complex)
    out[0] = table[0]
    for level in range(1, n):
        table = (table[1:] - table[:-1]) / (nodes[level:] - nodes[:-level])
        out[level] = table[0]
    return out


def _temporal_modes(k, t):
    if k.family is Family.DYSON:
        j = np.arange(k.order + 1)
        if t == 0:
            return (j == 0).astype(float)
        return np.exp(j * np.log(t) - scipy.special.gammaln(j + 1))
    if k.family is Family.FABER:
        return faber_modes(k.mode_params, t, k.order).values
    if k.family is Family.LAGRANGE:
        return np.exp(t * k.mode_params.eigenvalues)
    return exp_divided_differences(k.mode_params.eigenvalues, t)


def kernel_eval(k, t):
    """
    Avalia g(t) = sum_j g_j h_j(t) e f(t) = sum_j f_j h_j(t).

    Returns:
        tuple: (g, f) reais
    """
    if t < 0:
        raise DimensionError(f"Tempo negativo: {t}")
    modes = _temporal_modes(k, t)
    return float(np.real(k.g @ modes)), float(np.real(k.f @ modes))


def _is_uniform_from_zero(times):
    if times.size < 3 or times[0] != 0:
        return False
    steps = np.diff(times)
    return bool(np.allclose(steps, steps[0], rtol=1e-12, atol=0))


def kernel_table(k, times):
    """kernel_eval sobre uma grade; devolve os vetores (g, f)."""
    times = np.asarray(times, dtype=float)
    if k.family is Family.LAGRANGE:
        modes = np.exp(np.outer(times, k.mode_params.eigenvalues))
    elif k.family is Family.NEWTON and _is_uniform_from_zero(times):
        # linha 0 de expm(t J) propagada passo a passo: e^{(i+1) dt J} = e^{i dt J} e^{dt J}
        nodes = k.mode_params.eigenvalues
        bidiagonal = np.diag(nodes) + np.diag(np.ones(nodes.size - 1), 1)
        step = scipy.linalg.expm((times[1] - times[0]) * bidiagonal)
        modes = np.zeros((times.size, nodes.size), dtype=complex)
        modes[0, 0] = 1.0
        for i in range(1, times.size):
            modes[i] = modes[i - 1] @ step
    else:
        modes = np.array([_temporal_modes(k, t) for t in times])
    if modes.size == 0:
        return np.zeros(0), np.zeros(0)
    return np.real(modes @ k.g), np.real(modes @ k.f)


def _series_transform(k, coeffs, s):
    if k.family is Family.DYSON:
        return complex(np.sum(coeffs / s ** np.arange(1, k.order + 2)))
    if k.family is Family.FABER:
        ellipse = k.mode_params
        shifted = s - ellipse.c0
        j = np.arange(k.order + 1)
        if abs(ellipse.c1) < config.TAYLOR_LIMIT_THRESHOLD:
            return complex(np.sum(coeffs / shifted ** (j + 1)))
        root = np.sqrt(complex(shifted * shifted - 4.0 * ellipse.c1))
        ratio = (root - shifted) / (2.0 * -ellipse.c1)
        return complex(np.sum(coeffs * ratio ** j) / root)
    raise UnsupportedFamilyError(f"Transformada de Laplace não disponível para a família {k.family.value}")


def laplace_G(k, s):
    """
    Série de Laplace do núcleo g.

    Dyson: sum_j g_j / s^{j+1}.
    Faber: sum_j g_j (sqrt(s'^2 - 4c1) - s')^j / (2^j (-c1)^j sqrt(s'^2 - 4c1)),
    com s' = s - c0 (desloca o fator e^{t c0} dos modos) e raiz principal.
    """
    return _series_transform(k, k.g, complex(s))


def laplace_Y(model, y0, s):
    """Solução no domínio de Laplace Y(s) = ((F(s) + b)/s + y0) / (s - G(s) - a)."""
    s = complex(s)
    big_g = _series_transform(model.kernel, model.kernel.g, s)
    big_f = _series_transform(model.kernel, model.kernel.f, s)
    return ((big_f + model.b) / s + y0) / (s - big_g - model.a)


def exact_kernel(r, t):
    """
    Núcleo exato g(t) = bvec . e^{t M11^T} avec, f(t) = (e^{t M11^T} M11^T avec) . mean.

    Aceita um tempo ou uma grade; grades uniformes a partir de 0 são
    propagadas com um único propagador de passo.
    """
    m = r.generator
    block = np.column_stack([r.avec, mat_vec(m, r.avec)])
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if times.size == 0:
        return np.zeros(0), np.zeros(0)

    states = np.zeros((times.size,) + block.shape)
    if _is_uniform_from_zero(times):
        propagator = expm_apply(m, times[1], np.eye(m.shape[0]))
        states[0] = block
        for i in range(1, times.size):
            states[i] = propagator @ states[i - 1]
    else:
        for i, ti in enumerate(times):
            states[i] = expm_apply(m, ti, block)

    g = states[:, :, 0] @ r.bvec
    f = states[:, :, 1] @ r.mean_rest
    if np.ndim(t) == 0:
        return float(g[0]), float(f[0])
    return g, f


def expand(r, family, order=None, ellipse=None):
    """Gera a expansão da família pedida (Lagrange e Newton ignoram a ordem)."""
    family = Family(family)
    if family is Family.DYSON:
        return dyson_coeffs(r, order)
    if family is Family.FABER:
        return faber_coeffs(r, ellipse, order)
    if family is Family.LAGRANGE:
        return lagrange_coeffs(r)
    return newton_coeffs(r)
