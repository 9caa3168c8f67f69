## TITLE: liftbench local statistics
## CC: okzyrox
## LICENSE: MIT

import logging
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .ensembles import LiftedGraph
from .errors import BaseMismatch, HardConstraintsViolated, LayoutMissing, RepairInfeasible, SizeCapExceeded, \
    WitnessUnavailable
from .graph_core import Multigraph, find_bipartition
from .sdp import DEFAULT_C0, EQ_TOL, PSD_TOL, ConstraintCheck, FeasibilityReport, PathStatsInstance, \
    PseudoPartition, slack_for, window_basis
from .spectral import is_ramanujan, nb_values, self_avoiding_matrix

logger = logging.getLogger(__name__)

PLG_CAP = 8
DENSE_CAP = 6000


def falling(x: int, r: int) -> int:
    out = 1
    for q in range(r):
        out *= x - q
    return out


@dataclass(frozen=True)
class PartiallyLabelledGraph:
    size: int
    edges: Tuple[Tuple[int, int], ...] = ()
    ## (vertex, label) pairs for the distinguished vertices
    labels: Tuple[Tuple[int, int], ...] = ()
    ## bipartite mode: side 0 / 1 of every vertex
    sides: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"A partially labelled graph needs a vertex, got size {self.size}")
        if self.size > PLG_CAP or len(self.edges) > PLG_CAP:
            raise SizeCapExceeded(f"Partially labelled graphs are capped at {PLG_CAP} vertices and edges")
        edges = []
        for u, v in self.edges:
            if u == v or not (0 <= u < self.size and 0 <= v < self.size):
                raise ValueError(f"Bad edge ({u}, {v}) for {self.size} vertices")
            edges.append((min(u, v), max(u, v)))
        if len(set(edges)) != len(edges):
            raise ValueError("Partially labelled graphs are simple")
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        seen = set()
        for v, _ in self.labels:
            if not 0 <= v < self.size or v in seen:
                raise ValueError(f"Bad or repeated labelled vertex {v}")
            seen.add(v)
        object.__setattr__(self, "labels", tuple(sorted((int(v), int(i)) for v, i in self.labels)))
        if self.sides is not None:
            if len(self.sides) != self.size:
                raise ValueError(f"Need one side per vertex, got {len(self.sides)}")
            if any(self.sides[u] == self.sides[v] for u, v in self.edges):
                raise ValueError("An edge joins two vertices on the same side")
            object.__setattr__(self, "sides", tuple(int(s) for s in self.sides))

    @classmethod
    def path(cls, s: int, i: int, j: int, first_side: Optional[int] = None) -> "PartiallyLabelledGraph":
        """path with s edges, end 0 labelled i and end s labelled j"""
        if s < 1:
            raise ValueError(f"Path needs at least one edge, got {s}")
        sides = None if first_side is None else tuple((first_side + r) % 2 for r in range(s + 1))
        return cls(s + 1, tuple((r, r + 1) for r in range(s)), ((0, i), (s, j)), sides)

    @classmethod
    def edgeless(cls, labels: Sequence[int], unlabelled: int = 0,
                 sides: Optional[Sequence[int]] = None) -> "PartiallyLabelledGraph":
        return cls(len(labels) + unlabelled, (), tuple(enumerate(labels)), None if sides is None else tuple(sides))

    @property
    def bipartite(self) -> bool:
        return self.sides is not None

    @property
    def S(self) -> frozenset:
        return frozenset(v for v, _ in self.labels)

    @property
    def tau(self) -> Dict[int, int]:
        return dict(self.labels)

    def graph(self) -> nx.Graph:
        out = nx.Graph()
        out.add_nodes_from(range(self.size))
        out.add_edges_from(self.edges)
        return out

    @property
    def zeta(self) -> int:
        return self.size - len(self.edges)

    @property
    def cc(self) -> int:
        return nx.number_connected_components(self.graph())

    def is_forest(self) -> bool:
        return nx.is_forest(self.graph())

    def is_pruned(self) -> bool:
        """forest whose leaves and isolated vertices are all labelled"""
        graph = self.graph()
        return nx.is_forest(graph) and all(v in self.S for v in graph if graph.degree(v) <= 1)

    def neighbours(self) -> List[List[int]]:
        out = [[] for _ in range(self.size)]
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return out

    def disjoint_union(self, other: "PartiallyLabelledGraph") -> "PartiallyLabelledGraph":
        if self.bipartite != other.bipartite:
            raise ValueError("Cannot join a bipartite and a non-bipartite partially labelled graph")
        shift = self.size
        edges = self.edges + tuple((u + shift, v + shift) for u, v in other.edges)
        labels = self.labels + tuple((v + shift, i) for v, i in other.labels)
        sides = None if self.sides is None else self.sides + other.sides
        return PartiallyLabelledGraph(self.size + other.size, edges, labels, sides)

    def to_dict(self) -> Dict[str, Any]:
        return {"size": self.size, "edges": [list(e) for e in self.edges], "labels": dict(self.labels),
                "sides": list(self.sides) if self.sides is not None else None}

    def __str__(self):
        return f"PLG(size={self.size}, edges={list(self.edges)}, labels={dict(self.labels)})"


def _search_order(plg: PartiallyLabelledGraph) -> List[int]:
    ## labelled vertices seed each component, then bfs so later vertices touch earlier ones
    nbrs = plg.neighbours()
    order, seen = [], set()
    starts = sorted(plg.S) + list(range(plg.size))
    for start in starts:
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _label_halves(M: Multigraph) -> np.ndarray:
    layout = find_bipartition(M)
    if layout is None:
        raise LayoutMissing(f"Base {M} is not bipartite")
    return layout.side_of()


def m_weight(plg: PartiallyLabelledGraph, M: Multigraph) -> Fraction:
    """
    sum over extensions of tau to every vertex of
    prod_v prod_i falling(M[tau(v), i], deg_i(v)) / prod_edges M[tau(a), tau(b)]
    """
    mult = np.asarray(M.mult, dtype=np.int64)
    k = mult.shape[0]
    halves = _label_halves(M) if plg.bipartite else None
    tau = plg.tau
    for v, i in tau.items():
        if not 0 <= i < k:
            raise ValueError(f"Label {i} outside [0, {k})")
        if halves is not None and halves[i] != plg.sides[v]:
            raise ValueError(f"Label {i} on vertex {v} is not partition-respecting")
    nbrs = plg.neighbours()
    order = _search_order(plg)
    position = {v: r for r, v in enumerate(order)}
    assign = [-1] * plg.size
    total = Fraction(0)

    def weight() -> Fraction:
        num, den = 1, 1
        for v in range(plg.size):
            counts = Counter(assign[w] for w in nbrs[v])
            for i, deg in counts.items():
                num *= falling(int(mult[assign[v], i]), deg)
        for a, b in plg.edges:
            den *= int(mult[assign[a], assign[b]])
        return Fraction(num, den)

    def extend(r: int):
        nonlocal total
        if r == len(order):
            total += weight()
            return
        v = order[r]
        placed = [assign[w] for w in nbrs[v] if position[w] < r]
        if v in tau:
            choices = [tau[v]]
        else:
            choices = range(k)
            if halves is not None:
                choices = [i for i in choices if halves[i] == plg.sides[v]]
        for i in choices:
            if all(mult[i, j] > 0 for j in placed):
                assign[v] = i
                extend(r + 1)
        assign[v] = -1

    extend(0)
    return total


def n_edgeless(plg: PartiallyLabelledGraph, n: int, k: int) -> int:
    """exact count of label-respecting injective placements of an edgeless graph"""
    if plg.edges:
        raise ValueError(f"{plg} is not edgeless")
    if n % k:
        raise ValueError(f"n = {n} is not divisible by k = {k}")
    per_label = Counter(i for _, i in plg.labels)
    out = 1
    for c in per_label.values():
        out *= falling(n // k, c)
    if not plg.bipartite:
        return out * falling(n - len(plg.S), plg.size - len(plg.S))
    for side in (0, 1):
        labelled = sum(1 for v in plg.S if plg.sides[v] == side)
        free = sum(1 for v in range(plg.size) if v not in plg.S and plg.sides[v] == side)
        out *= falling(n // 2 - labelled, free)
    return out


def count_occurrences(plg: PartiallyLabelledGraph, g: Multigraph, sigma=None) -> int:
    """injective homomorphisms of the small graph into g agreeing with sigma on the labelled vertices"""
    n = g.n
    mult = g.mult
    tau = plg.tau
    if tau and sigma is None:
        raise ValueError("Labelled vertices need a labelling sigma")
    sigma = np.zeros(n, dtype=np.int64) if sigma is None else np.asarray(sigma)
    if plg.bipartite:
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"{g} is not bipartite")
        side = layout.side_of()
    else:
        side = np.zeros(n, dtype=np.int64)
    vsides = plg.sides if plg.bipartite else (0,) * plg.size

    nbrs = plg.neighbours()
    core = [v for v in _search_order(plg) if nbrs[v]]
    isolated = [v for v in range(plg.size) if not nbrs[v]]
    position = {v: r for r, v in enumerate(core)}
    g_nbrs = [np.nonzero(mult[u])[0].tolist() for u in range(n)]
    pool_size = Counter(zip(sigma.tolist(), side.tolist()))
    side_size = Counter(side.tolist())
    iso_labelled = Counter((tau[v], vsides[v]) for v in isolated if v in tau)
    iso_free = Counter(vsides[v] for v in isolated if v not in tau)
    iso_labelled_side = Counter()
    for (_, sd), c in iso_labelled.items():
        iso_labelled_side[sd] += c

    image = [-1] * plg.size
    used = set()
    total = 0

    def isolated_count() -> int:
        out = 1
        used_pool = Counter((int(sigma[u]), int(side[u])) for u in used)
        used_side = Counter(int(side[u]) for u in used)
        for key, c in iso_labelled.items():
            out *= falling(pool_size.get(key, 0) - used_pool.get(key, 0), c)
        for sd, c in iso_free.items():
            out *= falling(side_size.get(sd, 0) - used_side.get(sd, 0) - iso_labelled_side.get(sd, 0), c)
        return out

    def extend(r: int, weight: int):
        nonlocal total
        if r == len(core):
            total += weight * isolated_count()
            return
        v = core[r]
        placed = [w for w in nbrs[v] if position[w] < r]
        candidates = g_nbrs[image[placed[0]]] if placed else range(n)
        for c in candidates:
            if c in used or side[c] != vsides[v]:
                continue
            if v in tau and sigma[c] != tau[v]:
                continue
            factor = 1
            for w in placed:
                factor *= int(mult[c, image[w]])
                if not factor:
                    break
            if not factor:
                continue
            image[v] = c
            used.add(c)
            extend(r + 1, weight * factor)
            used.discard(c)
            image[v] = -1

    extend(0, 1)
    return total


## pseudomoments

@dataclass
class PseudoMoment:
    """
    degree-2 pseudomoments over (vertex, label) pairs, index u * k + i.
    Q is the sum of whichever parts are present: factor F (Q += F F^T, shape n x k x r),
    kron terms (Q += A kron B) and a dense matrix
    """
    ell: np.ndarray
    factor: Optional[np.ndarray] = None
    kron: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    dense: Optional[np.ndarray] = None
    ## Q - ell ell^T = sum A kron v v^T with every A PSD
    schur_terms: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None
    log: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.ell.shape[0]

    @property
    def k(self) -> int:
        return self.ell.shape[1]

    def block(self, i: int, j: int) -> np.ndarray:
        """n x n matrix of E[x_{u,i} x_{v,j}]"""
        out = np.zeros((self.n, self.n))
        if self.factor is not None:
            out += self.factor[:, i, :] @ self.factor[:, j, :].T
        for a, b in self.kron:
            if b[i, j]:
                out += b[i, j] * a
        if self.dense is not None:
            out += self.dense[i::self.k, j::self.k]
        return out

    def to_dense(self) -> np.ndarray:
        size = self.n * self.k
        if size > DENSE_CAP:
            raise SizeCapExceeded(f"Dense pseudomoment of size {size} exceeds cap {DENSE_CAP}")
        out = np.zeros((size, size)) if self.dense is None else self.dense.copy()
        if self.factor is not None:
            flat = self.factor.reshape(size, -1)
            out += flat @ flat.T
        for a, b in self.kron:
            out += np.kron(a, b)
        return out

    def bordered(self) -> np.ndarray:
        flat = self.ell.reshape(-1)
        q = self.to_dense()
        top = np.concatenate([[1.0], flat])
        return np.vstack([top, np.column_stack([flat, q])])

    def schur_min_eig(self) -> Tuple[float, str]:
        """smallest eigenvalue of Q - ell ell^T (a lower bound when read off the decomposition)"""
        if self.schur_terms is not None:
            bound = 0.0
            seen = {}
            for a, v in self.schur_terms:
                if id(a) not in seen:
                    seen[id(a)] = float(np.linalg.eigvalsh(a)[0])
                bound += min(0.0, seen[id(a)]) * float(np.dot(v, v))
            return bound, "decomposition"
        if self.factor is not None and not self.kron and self.dense is None:
            ## nonzero spectrum of C diag(1,..,1,-1) C^T equals that of G^1/2 diag(..) G^1/2, G = C^T C
            flat = np.column_stack([self.factor.reshape(self.n * self.k, -1), self.ell.reshape(-1)])
            signs = np.ones(flat.shape[1])
            signs[-1] = -1.0
            w, v = np.linalg.eigh(flat.T @ flat)
            root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
            values = np.linalg.eigvalsh(root @ (signs[:, None] * root))
            return min(0.0, float(values[0])), "factor"
        flat = self.ell.reshape(-1)
        return float(np.linalg.eigvalsh(self.to_dense() - np.outer(flat, flat))[0]), "dense"


def lost2_planted(lift: LiftedGraph) -> PseudoMoment:
    x = lift.indicator()
    return PseudoMoment(ell=x, factor=x[:, :, None], log={"source": "planted", "m": lift.m})


## constraints

@dataclass
class PathConstraint:
    plg: PartiallyLabelledGraph
    s: int
    i: int
    j: int
    weight: Fraction
    target: float
    window: float


@dataclass
class LabelConstraint:
    plg: PartiallyLabelledGraph
    target: int


@dataclass
class Lost2Constraints:
    n: int
    k: int
    D: int
    delta: float
    c0: float
    slack_abs: float
    bipartite: bool
    paths: List[PathConstraint]
    labels: List[LabelConstraint]
    saw: Dict[int, np.ndarray] = field(repr=False)
    graph_sides: Optional[np.ndarray] = None
    label_halves: Optional[np.ndarray] = None

    def inflated(self, factor: float) -> "Lost2Constraints":
        """same constraint set with every moment window scaled"""
        paths = [PathConstraint(p.plg, p.s, p.i, p.j, p.weight, p.target,
                                factor * self.delta * self.n + self.slack_abs) for p in self.paths]
        return Lost2Constraints(self.n, self.k, self.D, factor * self.delta, self.c0, self.slack_abs, self.bipartite,
                                paths, self.labels, self.saw, self.graph_sides, self.label_halves)


def lost2_build_constraints(g: Multigraph, M: Multigraph, D: int, delta: float, bipartite: bool = False,
                            c0: float = DEFAULT_C0, threads: int = 1) -> Lost2Constraints:
    """pruned-forest moment windows (labelled paths) and the edgeless label constraints"""
    d = g.require_regular()
    if M.require_regular() != d:
        raise BaseMismatch(f"Base degree {M.regular_degree()} does not match graph degree {d}")
    n, k = g.n, M.n
    if n % k:
        raise BaseMismatch(f"n = {n} is not a multiple of the base size {k}")
    if D < 1 or not delta > 0:
        raise ValueError(f"Need D >= 1 and delta > 0, got D={D}, delta={delta}")
    halves = sides = None
    if bipartite:
        halves = _label_halves(M)
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"{g} is not bipartite")
        sides = layout.side_of()
    slack = slack_for(n, c0)

    paths = []
    for s in range(1, D + 1):
        for i in range(k):
            for j in range(k):
                first = None if halves is None else int(halves[i])
                if halves is not None and (first + s) % 2 != halves[j]:
                    continue
                plg = PartiallyLabelledGraph.path(s, i, j, first)
                weight = m_weight(plg, M)
                paths.append(PathConstraint(plg, s, i, j, weight, float(Fraction(n, k) * weight), delta * n + slack))

    def side_list(labels):
        return None if halves is None else [int(halves[i]) for i in labels]

    labels = []
    for i in range(k):
        plg = PartiallyLabelledGraph.edgeless([i], sides=side_list([i]))
        labels.append(LabelConstraint(plg, n_edgeless(plg, n, k)))
    for i in range(k):
        for j in range(i, k):
            plg = PartiallyLabelledGraph.edgeless([i, j], sides=side_list([i, j]))
            labels.append(LabelConstraint(plg, n_edgeless(plg, n, k)))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        saw = dict(zip(range(1, D + 1), pool.map(lambda s: self_avoiding_matrix(g, s), range(1, D + 1))))
    logger.debug("lost2 constraints: %d paths, %d label constraints", len(paths), len(labels))
    return Lost2Constraints(n, k, D, delta, c0, slack, bipartite, paths, labels, saw, sides, halves)


def _hard_residuals(pm: PseudoMoment, j: int, sides=None, halves=None) -> Tuple[Dict[str, float], Dict[int, np.ndarray]]:
    """hard-constraint residuals touching column label j, plus the blocks (i, j)"""
    n, k = pm.n, pm.k
    res = {"hard_idempotent": 0.0, "hard_exclusive": 0.0, "hard_row": 0.0, "hard_cross": 0.0}
    blocks = {}
    row_sum = np.zeros((n, n))
    for i in range(k):
        b = pm.block(i, j)
        blocks[i] = b
        row_sum += b
        diag = np.diag(b)
        if i == j:
            res["hard_idempotent"] = max(res["hard_idempotent"], float(np.max(np.abs(diag - pm.ell[:, j]))))
        else:
            res["hard_exclusive"] = max(res["hard_exclusive"], float(np.max(np.abs(diag))))
        if sides is not None and halves[i] == halves[j]:
            cross = b[np.ix_(sides == 0, sides == 1)]
            if cross.size:
                res["hard_cross"] = max(res["hard_cross"], float(np.max(np.abs(cross))),
                                        float(np.max(np.abs(b[np.ix_(sides == 1, sides == 0)]))))
    res["hard_row"] = float(np.max(np.abs(row_sum - pm.ell[None, :, j])))
    return res, blocks


def lost2_check(pm: PseudoMoment, constraints: Lost2Constraints, threads: int = 1) -> FeasibilityReport:
    n, k = pm.n, pm.k
    if (n, k) != (constraints.n, constraints.k):
        raise ValueError(f"Pseudomoment has shape ({n}, {k}), constraints expect ({constraints.n}, {constraints.k})")
    by_pair = {}
    for p in constraints.paths:
        by_pair.setdefault((p.i, p.j), []).append(p)
    pairs = {}
    for lc in constraints.labels:
        if len(lc.plg.labels) == 2:
            pairs[(lc.plg.labels[0][1], lc.plg.labels[1][1])] = lc.target

    def column(j: int):
        hard, blocks = _hard_residuals(pm, j, constraints.graph_sides, constraints.label_halves)
        out = []
        for i, b in blocks.items():
            for p in by_pair.get((i, j), []):
                value = float(np.vdot(b, constraints.saw[p.s]))
                out.append(ConstraintCheck(f"path_s{p.s}_{i}_{j}", value, p.target, p.window,
                                           bool(abs(value - p.target) <= p.window)))
            if (i, j) in pairs:
                target = pairs[(i, j)]
                value = float(b.sum() - np.trace(b))
                out.append(ConstraintCheck(f"label_pair_{i}_{j}", value, target, EQ_TOL * max(1.0, target),
                                           bool(abs(value - target) <= EQ_TOL * max(1.0, target))))
        return hard, out

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(column, range(k)))

    checks = []
    hard_sum = float(np.max(np.abs(pm.ell.sum(axis=1) - 1.0)))
    checks.append(ConstraintCheck("hard_sum", hard_sum, 0.0, EQ_TOL, hard_sum <= EQ_TOL))
    for name in ("hard_idempotent", "hard_exclusive", "hard_row") + (("hard_cross",) if constraints.bipartite else ()):
        worst = max(r[0][name] for r in results)
        checks.append(ConstraintCheck(name, worst, 0.0, EQ_TOL, worst <= EQ_TOL))
    for lc in constraints.labels:
        if len(lc.plg.labels) == 1:
            i = lc.plg.labels[0][1]
            value = float(pm.ell[:, i].sum())
            checks.append(ConstraintCheck(f"label_single_{i}", value, lc.target, EQ_TOL * max(1.0, lc.target),
                                          bool(abs(value - lc.target) <= EQ_TOL * max(1.0, lc.target))))
    for r in results:
        checks.extend(r[1])
    low, method = pm.schur_min_eig()
    checks.append(ConstraintCheck(f"psd_{method}", low, 0.0, PSD_TOL * n, bool(low >= -PSD_TOL * n)))
    passed = all(c.passed for c in checks)
    logger.debug("lost2 check on n=%d k=%d: %s", n, k, "pass" if passed else "fail")
    return FeasibilityReport(passed, n, constraints.delta, constraints.slack_abs, constraints.c0, checks)


def lost2_reduce(pm: PseudoMoment, tol: float = 1e-6) -> PseudoPartition:
    """P = sum_i Q_ii after the hard constraints are confirmed"""
    worst = {"hard_sum": float(np.max(np.abs(pm.ell.sum(axis=1) - 1.0)))}
    total = np.zeros((pm.n, pm.n))
    for j in range(pm.k):
        res, blocks = _hard_residuals(pm, j)
        for name, value in res.items():
            worst[name] = max(worst.get(name, 0.0), value)
        total += blocks[j]
    bad = {name: value for name, value in worst.items() if value > tol}
    if bad:
        raise HardConstraintsViolated(f"Pseudomoment breaks hard constraints: " +
                                      ", ".join(f"{name} off by {value:.3g}" for name, value in sorted(bad.items())))
    return PseudoPartition(total, {"source": "lost2_reduce", "k": pm.k})


def reduced_instance(M: Multigraph, D: int, delta: float, bipartite: bool = False) -> PathStatsInstance:
    """path statistics instance a reduced pseudomoment is measured against, tolerance (k + 1) delta"""
    return PathStatsInstance.from_base(M, D, (M.n + 1) * delta, bipartite=bipartite)


def lost2_lower_witness(g: Multigraph, M: Multigraph, D: int, delta: float, bipartite: bool = False,
                        c0: float = DEFAULT_C0, verify: bool = True,
                        cache: Optional[Dict[float, np.ndarray]] = None) -> PseudoMoment:
    """
    tensor-sum pseudomoment sum_r (Y^lam_r + J/k) kron v_r v_r^T / (k - 1) plus a constant part,
    one window witness Y^lam per distinct nontrivial base eigenvalue. bipartite bases pair v with
    sign * v at -lam and use S Y^lam S there, S the diagonal side signs of g
    """
    d = g.require_regular()
    if M.require_regular() != d:
        raise BaseMismatch(f"Base degree {M.regular_degree()} does not match graph degree {d}")
    if not is_ramanujan(M, bipartite=bipartite):
        raise WitnessUnavailable(f"Base {M} is not {'bipartite ' if bipartite else ''}Ramanujan")
    n, k = g.n, M.n
    values, vectors = np.linalg.eigh(M.mult.astype(float))
    trivial = [int(np.argmax(np.abs(vectors.T @ np.ones(k))))]
    sign_k = layout = None
    if bipartite:
        sign_k = (1 - 2 * _label_halves(M)).astype(float)
        overlap = np.abs(vectors.T @ sign_k)
        overlap[trivial] = -1.0
        trivial.append(int(np.argmax(overlap)))
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"{g} is not bipartite")
    cache = {} if cache is None else cache
    t0 = (k - 2) / k if bipartite else (k - 1) / k
    basis = None
    errors = {}

    def witness(lam: float) -> np.ndarray:
        nonlocal basis
        key = round(lam, 9)
        if key not in cache:
            if basis is None:
                basis = window_basis(g, D, layout)
            try:
                theta, error = basis.fit(nb_values([lam], D, d)[:, 0], range(1, D + 1))
            except RepairInfeasible as e:
                raise WitnessUnavailable(f"No symmetric witness at lambda = {lam:.6g}: {e}")
            errors[key] = t0 * error
            y = t0 * basis.gram(theta)
            if bipartite and abs(lam) <= 1e-9:
                ## only the side-preserving part survives at lam = 0
                y = 0.5 * (y + _flip(y, layout))
            cache[key] = y
        return cache[key]

    kron, schur = [], []
    norm = 1.0 / (k - 2) if bipartite else 1.0 / (k - 1)
    j_n = np.ones((n, n))
    offset = j_n / k
    if bipartite:
        offset = offset + layout.signed_projector() / k
    for r in range(k):
        lam = float(values[r])
        if r in trivial or (bipartite and lam < -1e-9):
            continue
        pieces = [(witness(lam), vectors[:, r])]
        if bipartite and lam > 1e-9:
            pieces.append((_flip(pieces[0][0], layout), sign_k * vectors[:, r]))
        for y, v in pieces:
            kron.append((norm * (y + offset), np.outer(v, v)))
            schur.append((norm * y, v))

    j_k, i_k = np.ones((k, k)), np.eye(k)
    if bipartite:
        s_n = layout.signed_projector()
        s_k = np.outer(sign_k, sign_k)
        kron.append((norm / k * j_n, (k - 1) / k * j_k + s_k / k - i_k))
        kron.append((norm / k * s_n, (k - 1) / k * s_k + j_k / k - i_k))
        schur.append((s_n / (k * k), sign_k))
    else:
        kron.append((j_n / (k * (k - 1)), j_k - i_k))
    pm = PseudoMoment(ell=np.full((n, k), 1.0 / k), kron=kron, schur_terms=schur,
                      log={"source": "lower_witness", "eigenvalues": sorted(cache), "bipartite": bipartite,
                           "fit_errors": {str(key): value for key, value in sorted(errors.items())}})
    if verify:
        constraints = lost2_build_constraints(g, M, D, delta, bipartite=bipartite, c0=c0).inflated(2.0)
        report = lost2_check(pm, constraints)
        failed = report.failed()
        if failed:
            raise WitnessUnavailable(f"Lower witness fails {len(failed)} checks, first {failed[0].name} "
                                     f"off by {failed[0].residual:.4g}")
    logger.info("lower witness on %s over %s: %d eigenvalue witnesses", g, M, len(cache))
    return pm


def _flip(y: np.ndarray, layout) -> np.ndarray:
    """S Y S with S = diag of the side signs"""
    sign = layout.sign_vector().astype(float)
    return sign[:, None] * y * sign[None, :]
