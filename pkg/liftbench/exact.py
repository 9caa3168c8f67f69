## TITLE: liftbench exact optimizers
## CC: okzyrox
## LICENSE: MIT

import itertools
import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import Quantity, hoffman_max_t_cut
from .ensembles import LiftedGraph
from .errors import BaseMismatch, SizeCapExceeded
from .graph_core import Multigraph
from .serial import Record

logger = logging.getLogger(__name__)

MAX_CUT2_CAP = 28
MAX_CUTT_CAP = 16
INDEPENDENCE_CAP = 60
CHROMATIC_CAP = 20
DOMINATION_CAP = 30
EXPANSION_SIZE_CAP = 8
EXPANSION_FULL_CAP = 20


@dataclass
class ExactResult(Record):
    quantity: Quantity
    value: Fraction
    witness: Any
    graph_digest: str = ""
    params: Dict[str, Any] = field(default_factory=dict)


## witness checkers, kept independent of the solvers

def cut_value(g: Multigraph, labels: Sequence[int]) -> Fraction:
    """cut edges / |E| with loops as half edges that are never cut"""
    labels = np.asarray(labels)
    total = int(g.degrees().sum())
    if total == 0:
        return Fraction(0)
    differ = labels[:, None] != labels[None, :]
    cut = int((g.mult * differ).sum()) // 2
    return Fraction(2 * cut, total)


def is_proper_coloring(g: Multigraph, colors: Sequence[int]) -> bool:
    colors = np.asarray(colors)
    same = colors[:, None] == colors[None, :]
    return not np.any((g.mult > 0) & same)


def is_independent(g: Multigraph, vertices: Iterable[int]) -> bool:
    idx = sorted(vertices)
    return not np.any(g.mult[np.ix_(idx, idx)] > 0)


def modified_weight(h: Multigraph, vertices: Iterable[int]) -> Fraction:
    ## 1 per loopless vertex, 1/2 per vertex with one loop, 0 otherwise; normalized by k
    loops = h.loops
    weight = Fraction(0)
    for v in vertices:
        if loops[v] == 0:
            weight += 1
        elif loops[v] == 1:
            weight += Fraction(1, 2)
    return weight / h.n


def is_dominating(g: Multigraph, vertices: Iterable[int]) -> bool:
    chosen = np.zeros(g.n, dtype=bool)
    chosen[list(vertices)] = True
    covered = chosen | (g.mult[:, chosen].sum(axis=1) > 0)
    return bool(np.all(covered))


def vertex_boundary(g: Multigraph, vertices: Iterable[int], include_self: bool = True) -> set:
    vertices = set(vertices)
    adjacent = g.mult[:, sorted(vertices)].sum(axis=1) > 0
    boundary = set(np.nonzero(adjacent)[0].tolist())
    return boundary if include_self else boundary - vertices


def expansion_value(g: Multigraph, vertices: Iterable[int], mode: str = "vertex", include_self: bool = True) -> Fraction:
    vertices = sorted(set(vertices))
    if not vertices:
        raise ValueError("Expansion of the empty set is undefined")
    if mode == "vertex":
        return Fraction(len(vertex_boundary(g, vertices, include_self)), len(vertices))
    if mode == "edge":
        inside = np.zeros(g.n, dtype=bool)
        inside[vertices] = True
        leaving = int(g.mult[np.ix_(inside, ~inside)].sum())
        return Fraction(leaving, len(vertices))
    raise ValueError(f"Unknown expansion mode {mode!r}")


## max t-cut

def _sweep_chunk(weights: np.ndarray, low: int, prefix: Sequence[int], prefix_bits: Sequence[int],
                 inner: Sequence[int]) -> Tuple[int, np.ndarray]:
    n = weights.shape[0]
    x = np.zeros(n, dtype=np.int64)
    for v, bit in zip(prefix, prefix_bits):
        x[v] = bit
    configs = np.arange(1 << low, dtype=np.int64)
    xl = (configs[:, None] >> np.arange(low)) & 1
    w_low = weights[:low, :low]
    cut_low = ((xl @ w_low) * (1 - xl)).sum(axis=1)
    w_lr = weights[:low, low:]
    ## contribution of edges low-rest and rest-rest for the starting assignment
    x_rest = x[low:]
    r_vec = w_lr.sum(axis=1) - 2 * (w_lr @ x_rest)
    col = w_lr.sum(axis=0)
    w_rr = weights[low:, low:]
    cut_rest = int((x_rest @ w_rr * (1 - x_rest)).sum())
    values = cut_low + xl @ r_vec + int(col @ x_rest) + cut_rest
    p = xl @ weights[:low, :]   # configs x n
    r_col = weights[:low, :].sum(axis=0)

    best_i = int(np.argmax(values))
    best = int(values[best_i])
    best_x = x.copy()
    best_low = best_i
    for step in range(1, 1 << len(inner)):
        j = inner[(step & -step).bit_length() - 1]
        old = x[j]
        same = np.where(x[low:] == old, 1, -1)
        same[j - low] = 0
        scalar = int(weights[j, low:] @ same)
        if old == 0:
            values = values + (r_col[j] - 2 * p[:, j]) + scalar
        else:
            values = values + (2 * p[:, j] - r_col[j]) + scalar
        x[j] = 1 - old
        i = int(np.argmax(values))
        if values[i] > best:
            best = int(values[i])
            best_x = x.copy()
            best_low = i
    labels = best_x.copy()
    labels[:low] = xl[best_low]
    return best, labels


def _max_cut_two(weights: np.ndarray, threads: int = 1) -> Tuple[int, np.ndarray]:
    n = weights.shape[0]
    if n <= 1:
        return 0, np.zeros(n, dtype=np.int64)
    free = n - 1  # the last vertex stays on side 0
    low = min(free, 14)
    high = list(range(low, free))
    prefix_len = min(len(high), max(0, math.ceil(math.log2(threads))) if threads > 1 else 0)
    prefix = high[len(high) - prefix_len:]
    inner = high[: len(high) - prefix_len]
    chunks = [[(c >> b) & 1 for b in range(prefix_len)] for c in range(1 << prefix_len)]

    def run(bits):
        return _sweep_chunk(weights, low, prefix, bits, inner)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, chunks))
    best, labels = results[0]
    for value, lab in results[1:]:
        if value > best:
            best, labels = value, lab
    return best, labels


def _bfs_order(g: Multigraph) -> List[int]:
    degrees = g.degrees()
    seen = set()
    order = []
    for start in sorted(range(g.n), key=lambda v: (-int(degrees[v]), v)):
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in np.nonzero(g.mult[v])[0].tolist():
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _max_cut_branch(g: Multigraph, t: int, stop_at: Optional[int]) -> Tuple[int, List[int]]:
    weights = g.mult.copy()
    np.fill_diagonal(weights, 0)
    order = _bfs_order(g)
    pos = {v: i for i, v in enumerate(order)}
    back = [[(u, int(weights[v, u])) for u in np.nonzero(weights[v])[0].tolist() if pos[u] < pos[v]] for v in order]
    back_total = [sum(w for _, w in edges) for edges in back]
    suffix = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + back_total[i]
    total = suffix[0]
    labels = [-1] * g.n
    best = [-1, None]
    nodes = [0]

    def rec(i: int, used: int, cur: int) -> bool:
        nodes[0] += 1
        if cur + suffix[i] <= best[0]:
            return False
        if i == len(order):
            best[0], best[1] = cur, list(labels)
            return best[0] >= total or (stop_at is not None and best[0] >= stop_at)
        v = order[i]
        ## colours 0..used-1 plus one fresh colour
        options = []
        for c in range(min(used + 1, t)):
            gain = sum(w for u, w in back[i] if labels[u] != c)
            options.append((gain, c))
        options.sort(key=lambda o: (-o[0], o[1]))
        for gain, c in options:
            labels[v] = c
            if rec(i + 1, max(used, c + 1), cur + gain):
                return True
        labels[v] = -1
        return False

    rec(0, 0, 0)
    logger.debug("max_%d_cut branch and bound visited %d nodes", t, nodes[0])
    return best[0], best[1]


def max_t_cut_exact(g: Multigraph, t: int = 2, threads: int = 1) -> ExactResult:
    if t < 2:
        raise ValueError(f"t must be at least 2, got {t}")
    cap = MAX_CUT2_CAP if t == 2 else MAX_CUTT_CAP
    if g.n > cap:
        raise SizeCapExceeded(f"max_{t}_cut_exact handles n <= {cap}, got {g.n}")
    total_degree = int(g.degrees().sum())
    if t == 2:
        weights = g.mult.copy()
        np.fill_diagonal(weights, 0)
        best, labels = _max_cut_two(weights, threads)
        labels = [int(x) for x in labels]
    else:
        stop_at = None
        if not g.has_loops() and g.regular_degree() and g.is_connected():
            ## no cut can beat the eigenvalue bound
            bound = hoffman_max_t_cut(g, t).bound
            stop_at = math.floor(bound * total_degree / 2 + 1e-9)
        best, labels = _max_cut_branch(g, t, stop_at)
    value = cut_value(g, labels)
    if value != Fraction(2 * best, total_degree if total_degree else 1):
        raise RuntimeError(f"Cut witness evaluates to {value}, solver reported {best}")
    return ExactResult(Quantity.MAX_T_CUT, value, labels, g.digest(), {"t": t})


## weighted independent sets

def _neighbour_masks(g: Multigraph) -> List[int]:
    masks = []
    for v in range(g.n):
        mask = 0
        for u in np.nonzero(g.mult[v])[0].tolist():
            if u != v:
                mask |= 1 << u
        masks.append(mask)
    return masks


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _clique_cover_bound(mask: int, nbrs: List[int], weights: List[int]) -> int:
    ## greedy clique cover, heaviest vertex first; each clique pays its top weight
    cliques = []
    for v in sorted(_bits(mask), key=lambda u: (-weights[u], u)):
        for clique in cliques:
            if clique[0] >> v & 1:
                clique[0] &= nbrs[v]
                break
        else:
            cliques.append([nbrs[v], weights[v]])
    return sum(c[1] for c in cliques)


def max_weight_independent(nbrs: List[int], weights: List[int]) -> Tuple[int, int]:
    """branch and bound, returns (weight, vertex mask)"""
    n = len(nbrs)
    best = [0, 0]
    start = sum(1 << v for v in range(n) if weights[v] > 0)

    def rec(cand: int, cur: int, chosen: int):
        ## vertices with no candidate neighbour always go in
        free = 0
        for v in _bits(cand):
            if not nbrs[v] & cand:
                free |= 1 << v
        if free:
            cur += sum(weights[v] for v in _bits(free))
            chosen |= free
            cand &= ~free
        if cur > best[0]:
            best[0], best[1] = cur, chosen
        if not cand:
            return
        if cur + _clique_cover_bound(cand, nbrs, weights) <= best[0]:
            return
        v = max(_bits(cand), key=lambda u: (bin(nbrs[u] & cand).count("1"), weights[u], -u))
        rec(cand & ~nbrs[v] & ~(1 << v), cur + weights[v], chosen | (1 << v))
        rec(cand & ~(1 << v), cur, chosen)

    rec(start, 0, 0)
    return best[0], best[1]


def independence_exact(g: Multigraph) -> ExactResult:
    if g.n > INDEPENDENCE_CAP:
        raise SizeCapExceeded(f"independence_exact handles n <= {INDEPENDENCE_CAP}, got {g.n}")
    weights = [0 if g.loops[v] else 1 for v in range(g.n)]
    best, mask = max_weight_independent(_neighbour_masks(g), weights)
    witness = sorted(_bits(mask))
    if not is_independent(g, witness) or len(witness) != best:
        raise RuntimeError("Independent set witness failed its check")
    return ExactResult(Quantity.INDEPENDENCE, Fraction(len(witness), g.n), witness, g.digest())


def modified_independence(h: Multigraph) -> ExactResult:
    """independent sets of h without its loops, vertex weight 1 / 1/2 / 0 by loop count, over k"""
    if h.n > INDEPENDENCE_CAP:
        raise SizeCapExceeded(f"modified_independence handles k <= {INDEPENDENCE_CAP}, got {h.n}")
    weights = [2 if h.loops[v] == 0 else 1 if h.loops[v] == 1 else 0 for v in range(h.n)]
    best, mask = max_weight_independent(_neighbour_masks(h), weights)
    witness = sorted(_bits(mask))
    value = modified_weight(h, witness)
    if not is_independent(h.loops_removed(), witness) or value != Fraction(best, 2 * h.n):
        raise RuntimeError("Modified independent set witness failed its check")
    return ExactResult(Quantity.MODIFIED_INDEPENDENCE, value, witness, h.digest())


## colouring

def _colourable(nbrs: List[int], n: int, k: int) -> Optional[List[int]]:
    colors = [-1] * n

    def saturation(v):
        return len({colors[u] for u in _bits(nbrs[v]) if colors[u] >= 0})

    def rec(done: int, used: int) -> bool:
        if done == n:
            return True
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (saturation(u), bin(nbrs[u]).count("1"), -u))
        taken = {colors[u] for u in _bits(nbrs[v])}
        ## a fresh colour is only ever tried once
        for c in range(min(used + 1, k)):
            if c in taken:
                continue
            colors[v] = c
            if rec(done + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    return colors if rec(0, 0) else None


def chromatic_exact(g: Multigraph) -> ExactResult:
    if g.n > CHROMATIC_CAP:
        raise SizeCapExceeded(f"chromatic_exact handles n <= {CHROMATIC_CAP}, got {g.n}")
    if g.has_loops():
        raise ValueError("A graph with loops has no proper colouring")
    nbrs = _neighbour_masks(g)
    k = 1 if g.n else 0
    while True:
        colors = _colourable(nbrs, g.n, k)
        if colors is not None:
            break
        logger.debug("chromatic_exact: not %d-colourable", k)
        k += 1
    if not is_proper_coloring(g, colors):
        raise RuntimeError("Colouring witness failed its check")
    return ExactResult(Quantity.CHROMATIC, Fraction(k), colors, g.digest())


## domination

def domination_exact(g: Multigraph) -> ExactResult:
    n = g.n
    if n > DOMINATION_CAP:
        raise SizeCapExceeded(f"domination_exact handles n <= {DOMINATION_CAP}, got {n}")
    closed = [m | (1 << v) for v, m in enumerate(_neighbour_masks(g))]
    full = (1 << n) - 1
    reach = max(bin(c).count("1") for c in closed)

    ## greedy start
    covered, greedy = 0, []
    while covered != full:
        v = max(range(n), key=lambda u: (bin(closed[u] & ~covered).count("1"), -u))
        greedy.append(v)
        covered |= closed[v]
    best = [len(greedy), sorted(greedy)]

    def rec(covered: int, chosen: List[int]):
        if covered == full:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), sorted(chosen)
            return
        missing = bin(full & ~covered).count("1")
        if len(chosen) + math.ceil(missing / reach) >= best[0]:
            return
        ## branch on the uncovered vertex with the fewest ways to cover it
        u = min(_bits(full & ~covered), key=lambda w: (bin(closed[w]).count("1"), w))
        options = sorted(_bits(closed[u]), key=lambda w: (-bin(closed[w] & ~covered).count("1"), w))
        for v in options:
            chosen.append(v)
            rec(covered | closed[v], chosen)
            chosen.pop()

    rec(0, [])
    if not is_dominating(g, best[1]):
        raise RuntimeError("Dominating set witness failed its check")
    return ExactResult(Quantity.DOMINATION, Fraction(best[0], n), best[1], g.digest())


## small set expansion

def _connected_subsets(adj: List[set], size: int) -> Iterable[Tuple[int, ...]]:
    """every connected vertex set of at most size vertices, each exactly once"""
    n = len(adj)

    def extend(sub: List[int], ext: set, root: int, seen: set):
        yield tuple(sorted(sub))
        if len(sub) == size:
            return
        ext = set(ext)
        while ext:
            w = ext.pop()
            fresh = {u for u in adj[w] if u > root and u not in seen}
            yield from extend(sub + [w], ext | fresh, root, seen | fresh)

    for v in range(n):
        start = {u for u in adj[v] if u > v}
        yield from extend([v], start, v, start | {v})


def small_set_expansion_exact(g: Multigraph, epsilon: float, mode: str = "vertex",
                              include_self: bool = True, full: bool = False) -> ExactResult:
    """
    min |boundary(S)| / |S| over nonempty S with |S| <= floor(eps n).
    sets whose parts are pairwise far apart (distance >= 3 for vertices, >= 2 for edges) never
    beat their best part, so the search runs over sets connected in G^2 (vertex) or G (edge).
    full=True checks every subset instead
    """
    if mode not in ("vertex", "edge"):
        raise ValueError(f"Unknown expansion mode {mode!r}")
    size = math.floor(epsilon * g.n)
    if size < 1:
        raise ValueError(f"epsilon * n = {epsilon * g.n} leaves no nonempty set")
    if full:
        if g.n > EXPANSION_FULL_CAP:
            raise SizeCapExceeded(f"Full expansion search handles n <= {EXPANSION_FULL_CAP}, got {g.n}")
        candidates = (c for r in range(1, size + 1) for c in itertools.combinations(range(g.n), r))
    else:
        if size > EXPANSION_SIZE_CAP:
            raise SizeCapExceeded(f"Expansion search handles sets up to {EXPANSION_SIZE_CAP}, got {size}")
        step = g.mult > 0
        np.fill_diagonal(step, False)
        if mode == "vertex":
            reach = (step.astype(np.int64) @ step.astype(np.int64)) > 0
            step = step | reach
            np.fill_diagonal(step, False)
        adj = [set(np.nonzero(step[v])[0].tolist()) for v in range(g.n)]
        candidates = _connected_subsets(adj, size)

    best = None
    for subset in candidates:
        value = expansion_value(g, subset, mode, include_self)
        key = (value, subset)
        if best is None or key < best:
            best = key
    quantity = Quantity.VERTEX_EXPANSION if mode == "vertex" else Quantity.EDGE_EXPANSION
    return ExactResult(quantity, best[0], list(best[1]), g.digest(),
                       {"epsilon": epsilon, "mode": mode, "include_self": include_self, "full": full})


## pushing base witnesses through a lift

def _fiber_union(lift: LiftedGraph, vertices: Iterable[int]) -> List[int]:
    chosen = np.isin(lift.sigma, list(vertices))
    return np.nonzero(chosen)[0].tolist()


def lift_assignment(base_result: ExactResult, lift: LiftedGraph) -> ExactResult:
    """
    carry the base witness to the lift fiber by fiber and evaluate it there exactly.
    modified independence picks one endpoint of every matching edge inside half-weight fibers
    """
    if base_result.graph_digest != lift.base.digest():
        raise BaseMismatch("Result was computed on a different base graph")
    g = lift.graph
    params = dict(base_result.params, lifted_from=base_result.graph_digest, m=lift.m)
    quantity = base_result.quantity
    match quantity:
        case Quantity.MAX_T_CUT:
            labels = [int(base_result.witness[i]) for i in lift.sigma]
            return ExactResult(quantity, cut_value(g, labels), labels, g.digest(), params)
        case Quantity.CHROMATIC:
            colors = [int(base_result.witness[i]) for i in lift.sigma]
            if not is_proper_coloring(g, colors):
                raise RuntimeError("Lifted colouring is not proper")
            return ExactResult(quantity, Fraction(len(set(colors))), colors, g.digest(), params)
        case Quantity.INDEPENDENCE:
            witness = _fiber_union(lift, base_result.witness)
            if not is_independent(g, witness):
                raise RuntimeError("Lifted independent set is not independent")
            return ExactResult(quantity, Fraction(len(witness), g.n), witness, g.digest(), params)
        case Quantity.MODIFIED_INDEPENDENCE:
            loops = lift.base.loops
            witness = _fiber_union(lift, [v for v in base_result.witness if loops[v] == 0])
            for v in base_result.witness:
                if loops[v] != 1:
                    continue
                fiber = set(lift.fiber(v).tolist())
                for u in sorted(fiber):
                    partner = [w for w in np.nonzero(g.mult[u])[0].tolist() if w in fiber][0]
                    if u < partner:
                        witness.append(u)
            witness = sorted(witness)
            if not is_independent(g, witness):
                raise RuntimeError("Lifted modified independent set is not independent")
            return ExactResult(Quantity.INDEPENDENCE, Fraction(len(witness), g.n), witness, g.digest(), params)
        case Quantity.DOMINATION:
            witness = _fiber_union(lift, base_result.witness)
            if not is_dominating(g, witness):
                raise RuntimeError("Lifted dominating set does not dominate")
            return ExactResult(quantity, Fraction(len(witness), g.n), witness, g.digest(), params)
        case Quantity.VERTEX_EXPANSION | Quantity.EDGE_EXPANSION:
            witness = _fiber_union(lift, base_result.witness)
            mode = "vertex" if quantity is Quantity.VERTEX_EXPANSION else "edge"
            value = expansion_value(g, witness, mode, base_result.params.get("include_self", True))
            return ExactResult(quantity, value, witness, g.digest(), params)
    raise ValueError(f"Cannot lift a {quantity} result")


def reassign_after_noise(lifted: ExactResult, noisy: Multigraph) -> ExactResult:
    """
    re-evaluate a lifted witness on a noisy copy of the lift, patching it the cheap way:
    independent sets drop one endpoint per broken edge, dominating sets take in every vertex
    left uncovered, cuts and expansion sets are kept as they are
    """
    params = dict(lifted.params, noisy=True)
    quantity = lifted.quantity
    match quantity:
        case Quantity.MAX_T_CUT:
            return ExactResult(quantity, cut_value(noisy, lifted.witness), list(lifted.witness), noisy.digest(), params)
        case Quantity.INDEPENDENCE:
            kept = set(lifted.witness)
            for u in sorted(kept):
                if u in kept and any(w in kept for w in np.nonzero(noisy.mult[u])[0].tolist()):
                    kept.discard(u)
            witness = sorted(kept)
            return ExactResult(quantity, Fraction(len(witness), noisy.n), witness, noisy.digest(), params)
        case Quantity.DOMINATION:
            chosen = set(lifted.witness)
            covered = np.zeros(noisy.n, dtype=bool)
            covered[list(chosen)] = True
            covered |= noisy.mult[:, sorted(chosen)].sum(axis=1) > 0
            witness = sorted(chosen | set(np.nonzero(~covered)[0].tolist()))
            return ExactResult(quantity, Fraction(len(witness), noisy.n), witness, noisy.digest(), params)
        case Quantity.VERTEX_EXPANSION | Quantity.EDGE_EXPANSION:
            mode = "vertex" if quantity is Quantity.VERTEX_EXPANSION else "edge"
            value = expansion_value(noisy, lifted.witness, mode, lifted.params.get("include_self", True))
            return ExactResult(quantity, value, list(lifted.witness), noisy.digest(), params)
    raise ValueError(f"No noisy reassignment for {quantity}")


def solve(quantity: Quantity, g: Multigraph, *, t: int = 2, epsilon: float = 0.25,
          include_self: bool = True, full: bool = False, threads: int = 1) -> ExactResult:
    match quantity:
        case Quantity.MAX_T_CUT: return max_t_cut_exact(g, t, threads=threads)
        case Quantity.CHROMATIC: return chromatic_exact(g)
        case Quantity.INDEPENDENCE: return independence_exact(g)
        case Quantity.MODIFIED_INDEPENDENCE: return modified_independence(g)
        case Quantity.DOMINATION: return domination_exact(g)
        case Quantity.VERTEX_EXPANSION:
            return small_set_expansion_exact(g, epsilon, "vertex", include_self=include_self, full=full)
        case Quantity.EDGE_EXPANSION:
            return small_set_expansion_exact(g, epsilon, "edge", include_self=include_self, full=full)
