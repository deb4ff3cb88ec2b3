"""
Sistemas lineares de teste: cadeias harmônicas sobre grafos (Bethe,
caminho, Erdős–Rényi) e a equação da onda num anel.
"""

import logging
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from mzfaber import config
from mzfaber.errors import DimensionError, IllConditionedBasisError
from mzfaber.mz_kernels import StatsKind, SystemSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphSpec:
    """
    Grafo de acoplamento da cadeia.

    adjacency: 0/1 simétrica com diagonal nula
    degree: diagonal com as somas das linhas de adjacency
    anchors: molas ligando cada nó a uma parede fixa (extremidades fixas)
    """

    n_nodes: int
    adjacency: np.ndarray
    degree: np.ndarray
    anchors: np.ndarray = None

    def __post_init__(self):
        adjacency = np.asarray(self.adjacency, dtype=float)
        if adjacency.shape != (self.n_nodes, self.n_nodes):
            raise DimensionError(f"Adjacência {adjacency.shape} para {self.n_nodes} nós")
        if not np.array_equal(adjacency, adjacency.T) or np.any(np.diag(adjacency) != 0):
            raise DimensionError("Adjacência precisa ser simétrica com diagonal nula")
        degree = np.asarray(self.degree, dtype=float)
        if not np.allclose(np.diag(degree), adjacency.sum(axis=1)):
            raise DimensionError("Grau não confere com as somas das linhas da adjacência")
        anchors = np.zeros(self.n_nodes) if self.anchors is None else np.asarray(self.anchors, dtype=float)
        object.__setattr__(self, 'adjacency', adjacency)
        object.__setattr__(self, 'degree', degree)
        object.__setattr__(self, 'anchors', anchors)

    @classmethod
    def from_networkx(cls, graph, anchors=None):
        nodes = sorted(graph.nodes)
        adjacency = nx.to_numpy_array(graph, nodelist=nodes, weight=None)
        return cls(len(nodes), adjacency, np.diag(adjacency.sum(axis=1)), anchors)

    def to_networkx(self):
        return nx.from_numpy_array(self.adjacency)

    @property
    def n_edges(self):
        return int(self.adjacency.sum() // 2)

    def stiffness(self):
        """B - D - diag(anchors), o operador das forças elásticas."""
        return self.adjacency - self.degree - np.diag(self.anchors)


def bethe_node_count(l, shells):
    return 1 + sum(l * (l - 1) ** (k - 1) for k in range(1, shells + 1))


def build_bethe(l, shells, root_is_shell=False):
    """
    Rede de Bethe com número de coordenação l e S camadas ao redor da raiz.

    Rotulagem em largura: raiz = 1, depois camada por camada. N = 1 + sum_{k=1}^S l(l-1)^{k-1}.
    As duas contagens de referência usam convenções diferentes:

    - root_is_shell=False: a raiz é o centro e S conta os anéis em volta;
      (l=3, S=8) dá 766 nós, a rede do experimento l = 3.
    - root_is_shell=True: a raiz já é a primeira camada; (l=3, S=3) dá
      10 nós (4 internos e 6 folhas).
    """
    if l < 2 or shells < 1:
        raise DimensionError(f"Rede de Bethe exige l >= 2 e S >= 1, recebido l={l}, S={shells}")
    rings = shells - 1 if root_is_shell else shells
    graph = nx.Graph()
    graph.add_node(0)
    frontier = [0]
    next_label = 1
    for ring in range(1, rings + 1):
        children_per_node = l if ring == 1 else l - 1
        new_frontier = []
        for parent in frontier:
            for _ in range(children_per_node):
                graph.add_edge(parent, next_label)
                new_frontier.append(next_label)
                next_label += 1
        frontier = new_frontier
    spec = GraphSpec.from_networkx(graph)
    logger.debug(f"Rede de Bethe l={l}: {rings} anéis, {spec.n_nodes} nós")
    return spec


def build_path(n):
    """Cadeia linear de n nós (rede de Bethe com l = 2 e tamanho livre)."""
    if n < 1:
        raise DimensionError(f"Caminho precisa de pelo menos um nó, recebido {n}")
    return GraphSpec.from_networkx(nx.path_graph(n))


def fix_endpoints(g):
    """
    Extremidades fixas: remove as folhas e prende os vizinhos a uma mola de parede.

    O grau efetivo (grau + âncora) dos nós remanescentes não muda.
    """
    leaves = [i for i in range(g.n_nodes) if g.adjacency[i].sum() == 1]
    keep = [i for i in range(g.n_nodes) if i not in leaves]
    if not keep:
        raise DimensionError("Grafo sem nós internos depois de remover as folhas")
    anchors = g.anchors.copy()
    for leaf in leaves:
        anchors += g.adjacency[leaf]
    adjacency = g.adjacency[np.ix_(keep, keep)]
    return GraphSpec(len(keep), adjacency, np.diag(adjacency.sum(axis=1)), anchors[keep])


def build_erdos_renyi(n, p, seed):
    """Grafo G(n, p): cada par incluído independentemente com probabilidade p."""
    if not 0.0 <= p <= 1.0:
        raise DimensionError(f"Probabilidade fora de [0, 1]: {p}")
    graph = nx.gnp_random_graph(n, p, seed=seed)
    return GraphSpec.from_networkx(graph)


def spring_constant(k, l_norm=None):
    """Constante de mola efetiva por aresta: k/l com normalização, k sem ela."""
    return k / l_norm if l_norm else k


def build_chain_system(g, k=1.0, m=1.0, l_norm=None, label=''):
    """
    Cadeia harmônica de primeira ordem nas variáveis (p, q):

        [dp/dt; dq/dt] = [[0, k (B - D)], [I/m, 0]] [p; q]

    Com l_norm, k é dividido por l (a energia de mola k/(2l) sum_ij B_ij (q_i - q_j)^2).
    Para l = 2 e k = m = 1 as frequências ficam em [0, sqrt(2)] e a VACF da
    ponta é J0(sqrt(2) t) - J4(sqrt(2) t).
    """
    if k <= 0 or m <= 0:
        raise DimensionError(f"k e m precisam ser positivos: k={k}, m={m}")
    k_eff = spring_constant(k, l_norm)
    n = g.n_nodes
    generator = np.block([
        [np.zeros((n, n)), k_eff * g.stiffness()],
        [np.eye(n) / m, np.zeros((n, n))],
    ])
    return SystemSpec(generator, np.zeros(2 * n), StatsKind.BERNE_EQUILIBRIUM_QUADRATIC, label=label)


def is_hamiltonian_chain(A, tol=1e-12):
    """Verifica a forma [[0, K], [I/m, 0]] com K simétrica."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        return False
    n = A.shape[0] // 2
    upper = A[:n, n:]
    lower = A[n:, :n]
    scale = lower[0, 0] if n else 0.0
    return bool(
        scale > 0
        and np.all(np.abs(A[:n, :n]) <= tol)
        and np.all(np.abs(A[n:, n:]) <= tol)
        and np.allclose(lower, scale * np.eye(n), atol=tol)
        and np.allclose(upper, upper.T, atol=tol)
    )


def chain_energy(system, x):
    """H(p, q) = p^T p / (2m) - q^T K q / 2 para a cadeia de gerador [[0, K], [I/m, 0]]."""
    A = system.A
    n = A.shape[0] // 2
    x = np.asarray(x, dtype=float)
    p, q = x[:n], x[n:]
    return float(0.5 * p @ (A[n:, :n] @ p) - 0.5 * q @ (A[:n, n:] @ q))


def equilibrium_sampler(system, temperature=1.0):
    """Amostrador de equilíbrio da cadeia: p ~ N(0, m T), q ~ N(0, T (-K)^+)."""
    if not is_hamiltonian_chain(system.A):
        raise DimensionError("Amostrador de equilíbrio exige cadeia hamiltoniana")
    return ChainEquilibriumSampler(system.A, temperature)


class ChainEquilibriumSampler:
    def __init__(self, A, temperature=1.0):
        n = A.shape[0] // 2
        self.n = n
        self.mass = 1.0 / A[n, 0]
        self.temperature = temperature
        stiffness = -A[:n, n:]
        self.q_cov = temperature * np.linalg.pinv(stiffness, hermitian=True)

    def sample(self, n_samples, rng):
        p = rng.normal(0.0, np.sqrt(self.mass * self.temperature), size=(self.n, n_samples))
        q = rng.multivariate_normal(np.zeros(self.n), self.q_cov, size=n_samples, method='eigh').T
        return np.vstack([p, q])


class DiracSampler:
    """Condição inicial determinística."""

    def __init__(self, state):
        self.state = np.asarray(state, dtype=float)

    def sample(self, n_samples, rng):
        return np.repeat(self.state[:, None], n_samples, axis=1)


@dataclass(frozen=True)
class WaveModelSpec:
    """
    Equação da onda no anel r1 < r < r2 com N = n_radial * n_angular modos.

    n_angular = 2J + 1 (funções 1, cos j theta, sin j theta para j = 1..J).
    Os primeiros n_random_modes coeficientes iniciais são gaussianos com
    média mode_mean e variância 1; os demais são zero.
    """

    n_radial: int = 5
    n_angular: int = 5
    n_random_modes: int = 25
    r1: float = 1.0
    r2: float = 11.0
    sensor_point: tuple = (1.1, 0.1)
    rng_seed: int = 0
    mode_mean: float = 0.0
    n_modes: int = field(default=None)

    def __post_init__(self):
        if self.n_radial < 1 or self.n_angular < 1 or self.n_angular % 2 == 0:
            raise DimensionError(f"n_angular precisa ser ímpar e positivo: {self.n_angular}")
        total = self.n_radial * self.n_angular
        if self.n_modes is None:
            object.__setattr__(self, 'n_modes', total)
        elif self.n_modes != total:
            raise DimensionError(f"n_modes = {self.n_modes} não fatora como {self.n_radial} x {self.n_angular}")
        if not self.r1 < self.r2:
            raise DimensionError(f"Raios inválidos: r1={self.r1}, r2={self.r2}")
        if not 0 <= self.n_random_modes <= self.n_modes:
            raise DimensionError(f"M = {self.n_random_modes} fora de 0..{self.n_modes}")
        r, _ = self.sensor_point
        if not self.r1 < r < self.r2:
            raise DimensionError(f"Sensor fora do anel: r = {r}")

    @property
    def width(self):
        return self.r2 - self.r1


def _angular_functions(n_angular, theta):
    """Valores e derivadas segundas de 1, cos j theta, sin j theta."""
    theta = np.asarray(theta, dtype=float)
    values = [np.ones_like(theta)]
    second = [np.zeros_like(theta)]
    for j in range(1, (n_angular - 1) // 2 + 1):
        values += [np.cos(j * theta), np.sin(j * theta)]
        second += [-j * j * np.cos(j * theta), -j * j * np.sin(j * theta)]
    return np.array(values), np.array(second)


def _radial_functions(spec, r):
    """sin(i pi (r - r1)/L), i = 1..n_radial, com primeira e segunda derivadas."""
    r = np.asarray(r, dtype=float)
    freq = np.pi * np.arange(1, spec.n_radial + 1)[:, None] / spec.width
    phase = freq * (r - spec.r1)
    return np.sin(phase), freq * np.cos(phase), -freq ** 2 * np.sin(phase)


def wave_basis(spec, r, theta):
    """
    Funções de base psi_n(r, theta) e o laplaciano cilíndrico de cada uma.

    Ordem dos índices: angular por fora, radial por dentro (n = a n_radial + i).

    Returns:
        tuple: (valores, laplacianos), cada um com forma (N, pontos)
    """
    radial, d_radial, dd_radial = _radial_functions(spec, r)
    angular, dd_angular = _angular_functions(spec.n_angular, theta)
    r = np.asarray(r, dtype=float)
    values = (angular[:, None, :] * radial[None, :, :]).reshape(spec.n_modes, -1)
    laplacian = (
        angular[:, None, :] * (dd_radial + d_radial / r)[None, :, :]
        + dd_angular[:, None, :] * (radial / r ** 2)[None, :, :]
    ).reshape(spec.n_modes, -1)
    return values, laplacian


def galerkin_matrix(spec):
    """
    Matriz de Galerkin A = M^{-1} K na medida polar r dr dtheta, com

        K_mn = int int psi_m (Delta psi_n) r dr dtheta,   M_mn = int int psi_m psi_n r dr dtheta.

    K é simétrica negativa (Dirichlet em r1 e r2), então A tem espectro real
    negativo. Gauss-Legendre em r (4x o número de modos radiais, no mínimo
    32 pontos) e trapézio em theta, exato para os polinômios trigonométricos
    da base.
    """
    n_r = max(4 * spec.n_radial, 32)
    n_t = 4 * spec.n_angular
    x, w = leggauss(n_r)
    r = spec.r1 + 0.5 * spec.width * (x + 1.0)
    w_r = 0.5 * spec.width * w * r
    theta = 2.0 * np.pi * np.arange(n_t) / n_t
    w_t = np.full(n_t, 2.0 * np.pi / n_t)

    rr, tt = np.meshgrid(r, theta, indexing='ij')
    weights = np.outer(w_r, w_t).ravel()
    values, laplacian = wave_basis(spec, rr.ravel(), tt.ravel())
    weighted = values * weights
    stiffness = weighted @ laplacian.T
    mass = weighted @ values.T
    return scipy.linalg.solve(mass, stiffness, assume_a='pos')


def collocation_nodes(spec):
    """Grade tensorial de raios internos equiespaçados por ângulos equiespaçados."""
    radii = spec.r1 + spec.width * np.arange(1, spec.n_radial + 1) / (spec.n_radial + 1)
    angles = 2.0 * np.pi * np.arange(spec.n_angular) / spec.n_angular
    tt, rr = np.meshgrid(angles, radii, indexing='ij')
    return rr.ravel(), tt.ravel()


@dataclass(frozen=True)
class SensorInfo:
    index: int
    node: tuple
    offset: float


class WaveInitialSampler:
    """
    Estado inicial (w, dw/dt) com w = Psi w_hat, w_hat_n ~ N(mode_mean, 1) para n < M.

    Usa numpy.random.Generator (PCG64); cada lote recebe uma semente
    derivada de SeedSequence.
    """

    def __init__(self, spec, psi):
        self.spec = spec
        self.psi = psi

    @property
    def mode_mean(self):
        mean = np.zeros(self.spec.n_modes)
        mean[: self.spec.n_random_modes] = self.spec.mode_mean
        return mean

    def mean_state(self):
        return np.concatenate([self.psi @ self.mode_mean, np.zeros(self.spec.n_modes)])

    def sample(self, n_samples, rng):
        modes = np.zeros((self.spec.n_modes, n_samples))
        modes[: self.spec.n_random_modes] = rng.normal(
            self.spec.mode_mean, 1.0, size=(self.spec.n_random_modes, n_samples)
        )
        return np.vstack([self.psi @ modes, np.zeros((self.spec.n_modes, n_samples))])


def build_wave_model(spec):
    """
    Modelo da onda no anel na forma dobrada de primeira ordem.

    d^2 w_hat/dt^2 = A w_hat (Galerkin), w = Psi w_hat nos nós de colocação,
    B = Psi A Psi^{-1} e o gerador [[0, I], [B, 0]] sobre (w, dw/dt).

    Returns:
        tuple: (SystemSpec, WaveInitialSampler, SensorInfo)

    Raises:
        IllConditionedBasisError: se cond(Psi) > PSI_CONDITION_MAX
    """
    galerkin = galerkin_matrix(spec)
    r_nodes, t_nodes = collocation_nodes(spec)
    psi, _ = wave_basis(spec, r_nodes, t_nodes)
    psi = psi.T

    condition = np.linalg.cond(psi)
    if condition > config.PSI_CONDITION_MAX:
        raise IllConditionedBasisError(
            f"cond(Psi) = {condition:.3e}; escolha outros nós de colocação"
        )
    nodal = scipy.linalg.solve(psi.T, (psi @ galerkin).T).T

    n = spec.n_modes
    generator = np.block([[np.zeros((n, n)), np.eye(n)], [nodal, np.zeros((n, n))]])
    sampler = WaveInitialSampler(spec, psi)
    system = SystemSpec(generator, sampler.mean_state(), StatsKind.CHORIN_INITIAL, label='wave_annulus')

    r_s, t_s = spec.sensor_point
    xs, ys = r_nodes * np.cos(t_nodes), r_nodes * np.sin(t_nodes)
    distance = np.hypot(xs - r_s * np.cos(t_s), ys - r_s * np.sin(t_s))
    nearest = int(np.argmin(distance))
    sensor = SensorInfo(index=nearest + 1, node=(float(r_nodes[nearest]), float(t_nodes[nearest])),
                        offset=float(distance[nearest]))
    logger.info(f"Modelo de onda: N={n}, cond(Psi)={condition:.2e}, sensor no nó {sensor.index} "
                f"(r={sensor.node[0]:.3f}, theta={sensor.node[1]:.3f}, desvio {sensor.offset:.3f})")
    return system, sampler, sensor
