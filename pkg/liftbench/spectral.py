## TITLE: liftbench spectral machinery
## CC: okzyrox
## LICENSE: MIT

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial.legendre import leggauss

from .errors import DepthCapExceeded, Disconnected, LayoutMissing, NotSymmetric
from .graph_core import Multigraph, find_bipartition
from .serial import Record

logger = logging.getLogger(__name__)

RAMANUJAN_SLACK = 1e-9


@dataclass
class Spectrum(Record):
    values: np.ndarray
    trivial_mask: np.ndarray
    vectors: Optional[np.ndarray] = field(default=None, metadata={"skip": True})

    @property
    def nontrivial(self) -> np.ndarray:
        return self.values[~self.trivial_mask]

    @property
    def extreme(self) -> float:
        rest = self.nontrivial
        return float(np.max(np.abs(rest))) if len(rest) else 0.0

    def __len__(self):
        return len(self.values)


def _check_symmetric(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NotSymmetric(f"Expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
        raise NotSymmetric("Matrix is not symmetric")
    return matrix


def symmetric_spectrum(matrix, vectors: bool = False) -> Spectrum:
    matrix = _check_symmetric(matrix)
    if vectors:
        values, vecs = np.linalg.eigh(matrix)
        order = np.argsort(values)[::-1]
        return Spectrum(values=values[order], trivial_mask=np.zeros(len(values), dtype=bool), vectors=vecs[:, order])
    values = np.linalg.eigvalsh(matrix)[::-1]
    return Spectrum(values=values, trivial_mask=np.zeros(len(values), dtype=bool))


def _householder_deflate(matrix: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    reflect v onto e_1 and drop the first row/column, O(n^2).
    v has to be an eigenvector of matrix
    """
    v = v / np.linalg.norm(v)
    w = v.copy()
    w[0] -= 1.0 if v[0] >= 0 else -1.0
    wn = float(w @ w)
    if wn < 1e-300:
        return matrix[1:, 1:].copy()
    aw = matrix @ w
    waw = float(w @ aw)
    ## H A H with H = I - 2 w w^T / wn
    reflected = (matrix
                 - (2.0 / wn) * np.outer(w, aw)
                 - (2.0 / wn) * np.outer(aw, w)
                 + (4.0 * waw / (wn * wn)) * np.outer(w, w))
    return reflected[1:, 1:]


def _reflect(v: np.ndarray, direction: np.ndarray) -> np.ndarray:
    direction = direction / np.linalg.norm(direction)
    w = direction.copy()
    w[0] -= 1.0 if direction[0] >= 0 else -1.0
    wn = float(w @ w)
    if wn < 1e-300:
        return v[1:].copy()
    return (v - (2.0 / wn) * w * float(w @ v))[1:]


def deflated_eigenvalues(matrix, known_vectors: Sequence[np.ndarray]) -> np.ndarray:
    """eigenvalues of matrix restricted to the orthogonal complement of known_vectors"""
    current = _check_symmetric(matrix)
    pending = [np.asarray(v, dtype=float) for v in known_vectors]
    while pending:
        v = pending.pop(0)
        pending = [_reflect(u, v) for u in pending]
        current = _householder_deflate(current, v)
        current = 0.5 * (current + current.T)
    return np.linalg.eigvalsh(current)[::-1]


def _trivial_vectors(g: Multigraph, bipartite: bool) -> List[np.ndarray]:
    ones = np.ones(g.n)
    if not bipartite:
        return [ones]
    layout = find_bipartition(g)
    if layout is None:
        raise LayoutMissing("Graph is not bipartite, no signed trivial eigenvector")
    return [ones, layout.sign_vector().astype(float)]


def graph_spectrum(g: Multigraph, bipartite: bool = False) -> Spectrum:
    """spectrum of the adjacency with the trivial eigenvalues (d, and -d if bipartite) flagged"""
    if not g.is_connected():
        raise Disconnected(f"Graph on {g.n} vertices is not connected")
    matrix = g.mult.astype(float)
    trivial = _trivial_vectors(g, bipartite)
    rest = deflated_eigenvalues(matrix, trivial)
    trivial_values = [float(v @ matrix @ v) / float(v @ v) for v in trivial]
    values = np.concatenate([np.array(trivial_values), rest])
    mask = np.zeros(len(values), dtype=bool)
    mask[: len(trivial_values)] = True
    order = np.argsort(-values, kind="stable")
    return Spectrum(values=values[order], trivial_mask=mask[order])


def spectral_radius(g: Multigraph, bipartite: Optional[bool] = None) -> float:
    """largest |lambda| below d. the -d eigenvalue of a bipartite g is dropped unless bipartite=False"""
    if bipartite is None:
        bipartite = g.is_connected() and find_bipartition(g) is not None
    return graph_spectrum(g, bipartite=bipartite).extreme


@dataclass
class RamanujanReport(Record):
    ramanujan: bool
    d: int
    extreme: float
    bound: float
    margin: float
    bipartite: bool
    lambda_2: float
    lambda_n: float

    def __bool__(self):
        return self.ramanujan


def is_ramanujan(h: Multigraph, bipartite: bool = False, slack: float = RAMANUJAN_SLACK) -> RamanujanReport:
    d = h.require_regular()
    spectrum = graph_spectrum(h, bipartite=bipartite)
    rest = spectrum.nontrivial
    bound = 2.0 * math.sqrt(d - 1) if d >= 1 else 0.0
    extreme = spectrum.extreme
    return RamanujanReport(
        ramanujan=bool(extreme <= bound + slack),
        d=d,
        extreme=extreme,
        bound=bound,
        margin=bound - extreme,
        bipartite=bipartite,
        lambda_2=float(rest[0]) if len(rest) else float("nan"),
        lambda_n=float(rest[-1]) if len(rest) else float("nan"),
    )


## non-backtracking polynomials

@dataclass(frozen=True)
class NBPolynomial:
    s: int
    d: int
    coeffs: Tuple[int, ...]  # low degree first

    def to_numpy(self) -> Polynomial:
        return Polynomial(np.array(self.coeffs, dtype=float))

    def __call__(self, x):
        return nb_values(x, self.s, self.d)[self.s]

    def __str__(self):
        terms = []
        for power, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}x^{power}")
        return " + ".join(reversed(terms)) or "0"


@lru_cache(maxsize=None)
def nb_polynomial(s: int, d: int) -> NBPolynomial:
    if s < 0:
        raise ValueError(f"Degree must be nonnegative, got {s}")
    if s == 0:
        return NBPolynomial(0, d, (1,))
    if s == 1:
        return NBPolynomial(1, d, (0, 1))
    if s == 2:
        return NBPolynomial(2, d, (-d, 0, 1))
    prev = list(nb_polynomial(s - 2, d).coeffs)
    cur = list(nb_polynomial(s - 1, d).coeffs)
    out = [0] * (s + 1)
    for power, c in enumerate(cur):
        out[power + 1] += c
    for power, c in enumerate(prev):
        out[power] -= (d - 1) * c
    return NBPolynomial(s, d, tuple(out))


def nb_values(x, s_max: int, d: int) -> np.ndarray:
    """q_0..q_{s_max} at the points x by the three-term recurrence, shape (s_max + 1, len(x))"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((s_max + 1, len(x)))
    out[0] = 1.0
    if s_max >= 1:
        out[1] = x
    if s_max >= 2:
        out[2] = x * x - d
    for s in range(2, s_max):
        out[s + 1] = x * out[s] - (d - 1) * out[s - 1]
    return out


def nb_norm_sq(s: int, d: int) -> int:
    ## E_KM[q_s^2]
    return 1 if s == 0 else d * (d - 1) ** (s - 1)


def nb_matrices(g: Multigraph, s_max: int) -> List[np.ndarray]:
    d = g.require_regular()
    a = g.mult.astype(float)
    n = g.n
    out = [np.eye(n)]
    if s_max >= 1:
        out.append(a.copy())
    if s_max >= 2:
        out.append(a @ a - d * np.eye(n))
    for s in range(2, s_max):
        out.append(a @ out[s] - (d - 1) * out[s - 1])
    return out[: s_max + 1]


def nb_matrix(g: Multigraph, s: int) -> np.ndarray:
    if s < 0:
        raise ValueError(f"Walk length must be nonnegative, got {s}")
    return nb_matrices(g, s)[s]


def self_avoiding_matrix(g: Multigraph, s: int, s_max: int = 8) -> np.ndarray:
    """simple path counts of length s between every pair, parallel edges multiply"""
    if s > s_max:
        raise DepthCapExceeded(f"Self-avoiding depth {s} exceeds cap {s_max}")
    if s < 0:
        raise ValueError(f"Path length must be nonnegative, got {s}")
    n = g.n
    out = np.zeros((n, n))
    if s == 0:
        return np.eye(n)
    mult = g.mult
    nbrs = [[(j, int(mult[i, j])) for j in np.nonzero(mult[i])[0].tolist() if j != i] for i in range(n)]

    for start in range(n):
        on_path = [False] * n
        on_path[start] = True
        row = out[start]
        ## iterative dfs, stack holds (vertex, depth, weight, next neighbour index)
        stack = [(start, 0, 1, 0)]
        while stack:
            v, depth, weight, idx = stack.pop()
            if idx < len(nbrs[v]):
                stack.append((v, depth, weight, idx + 1))
                w, m = nbrs[v][idx]
                if on_path[w]:
                    continue
                if depth + 1 == s:
                    row[w] += weight * m
                else:
                    on_path[w] = True
                    stack.append((w, depth + 1, weight * m, 0))
            elif v != start:
                on_path[v] = False
    return out


## kesten-mckay measure

@dataclass
class KMQuadrature:
    d: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=64)
def _km_rule(d: int, size: int) -> Tuple[np.ndarray, np.ndarray]:
    ## x = 2 sqrt(d-1) cos(theta) removes the square root at the edges
    t, w = leggauss(size)
    theta = 0.5 * math.pi * (t + 1.0)
    w = 0.5 * math.pi * w
    radius = 2.0 * math.sqrt(d - 1)
    sin2 = np.sin(theta) ** 2
    cos2 = np.cos(theta) ** 2
    density = (d / (2.0 * math.pi)) * 4.0 * (d - 1) * sin2 / (d * d - 4.0 * (d - 1) * cos2)
    return radius * np.cos(theta), w * density


def km_quadrature(d: int, size: int = 128) -> KMQuadrature:
    if d < 2:
        raise ValueError(f"Kesten-McKay measure needs d >= 2, got {d}")
    nodes, weights = _km_rule(d, size)
    return KMQuadrature(d=d, nodes=nodes, weights=weights)


def km_integrate(func: Callable[[np.ndarray], np.ndarray], d: int, tol: float = 1e-11,
                 start: int = 32, cap: int = 8192) -> float:
    """integral of func against the KM(d) measure, node count doubled until stable"""
    size = start
    previous = km_quadrature(d, size).integrate(func(_km_rule(d, size)[0]))
    while size < cap:
        size *= 2
        rule = km_quadrature(d, size)
        current = rule.integrate(func(rule.nodes))
        if abs(current - previous) < tol * max(1.0, abs(current)):
            return current
        previous = current
    logger.warning("Kesten-McKay quadrature did not settle below %g at %d nodes", tol, size)
    return previous


def _as_callable(p) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(p, NBPolynomial):
        return p
    if isinstance(p, Polynomial):
        return p
    if callable(p):
        return p
    return Polynomial(np.asarray(p, dtype=float))


def km_moment(p: Union[Polynomial, NBPolynomial, Sequence[float], Callable], d: int) -> float:
    return km_integrate(_as_callable(p), d)


def nb_coefficients(func: Callable[[np.ndarray], np.ndarray], d: int, s_max: int) -> np.ndarray:
    """c_s = E_KM[func q_s] / ||q_s||^2 for s = 0..s_max"""
    return np.array([
        km_integrate(lambda x, s=s: func(x) * nb_values(x, s, d)[s], d) / nb_norm_sq(s, d)
        for s in range(s_max + 1)
    ])


## chebyshev

def chebyshev_T(s: int) -> Polynomial:
    if s < 0:
        raise ValueError(f"Degree must be nonnegative, got {s}")
    coeffs = npcheb.cheb2poly([0] * s + [1])
    return Polynomial(np.rint(coeffs))


def evaluate_outside(s: int, x):
    """T_s(x) for |x| > 1 from the closed form, sign restored by parity"""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) <= 1.0):
        raise ValueError("evaluate_outside needs |x| > 1")
    ax = np.abs(x)
    root = np.sqrt(ax * ax - 1.0)
    value = 0.5 * ((ax - root) ** s + (ax + root) ** s)
    sign = np.where(x < 0, (-1.0) ** s, 1.0)
    return value * sign


def chebyshev_eval(s: int, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inside = np.abs(x) <= 1.0
    out[inside] = np.cos(s * np.arccos(x[inside]))
    if np.any(~inside):
        out[~inside] = evaluate_outside(s, x[~inside])
    return out


## short cycles

def short_cycle_vertices(g: Multigraph, C: int) -> set:
    """vertices lying on some cycle of length at most C (loops have length 1, parallel pairs 2)"""
    n = g.n
    mult = g.mult
    on_cycle = set()
    if C < 1:
        return on_cycle
    nbrs = [np.nonzero(mult[i])[0].tolist() for i in range(n)]
    for v in range(n):
        if mult[v, v] > 0:
            on_cycle.add(v)
            continue
        if C >= 2 and any(mult[v, w] >= 2 for w in nbrs[v]):
            on_cycle.add(v)
            continue
        if C < 3:
            continue
        for w in nbrs[v]:
            ## bfs from v without the edge v-w, depth C - 1
            dist = {v: 0}
            queue = deque([v])
            found = False
            while queue and not found:
                x = queue.popleft()
                if dist[x] >= C - 1:
                    continue
                for y in nbrs[x]:
                    if y == x or (x == v and y == w) or (x == w and y == v):
                        continue
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        if y == w:
                            found = True
                            break
                        queue.append(y)
            if found:
                on_cycle.add(v)
                break
    return on_cycle


def bad_vertices(g: Multigraph, L: int, C: int) -> frozenset:
    """vertices within distance L of a cycle of length at most C"""
    if L < 0 or C < 0:
        raise ValueError(f"L and C must be nonnegative, got L={L}, C={C}")
    sources = short_cycle_vertices(g, C)
    nbrs = [np.nonzero(g.mult[i])[0].tolist() for i in range(g.n)]
    dist = {v: 0 for v in sources}
    queue = deque(sources)
    while queue:
        x = queue.popleft()
        if dist[x] >= L:
            continue
        for y in nbrs[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return frozenset(dist)
