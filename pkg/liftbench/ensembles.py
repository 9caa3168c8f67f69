## TITLE: liftbench random graph ensembles
## CC: okzyrox
## LICENSE: MIT

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    AdversaryViolation,
    CompletionFailed,
    LayoutMissing,
    MissingBase,
    OddFiberWithLoops,
    ParityViolation,
    RetryCapExceeded,
)
from .graph_core import BipartiteLayout, Multigraph, SimpleGraph, find_bipartition, graph_distance, graph_from_dict
from .serial import Record, fraction_str
from .spectral import spectral_radius

logger = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(seed: int, trial: int, stream: int = 0) -> int:
    """
    per-trial seed: SeedSequence([seed, trial, stream]) folded to one 64 bit word.
    stream 0 is the null side, 1 the planted side, 2+ are free for noise etc
    """
    return int(np.random.SeedSequence([int(seed), int(trial), int(stream)]).generate_state(1, dtype=np.uint64)[0])


def _from_pairs(n: int, pairs: np.ndarray, **kwargs) -> SimpleGraph:
    adjacency = np.zeros((n, n), dtype=np.int64)
    adjacency[pairs[:, 0], pairs[:, 1]] = 1
    adjacency[pairs[:, 1], pairs[:, 0]] = 1
    return SimpleGraph(adjacency, **kwargs)


def _pairs_are_simple(n: int, pairs: np.ndarray) -> bool:
    if np.any(pairs[:, 0] == pairs[:, 1]):
        return False
    keys = np.minimum(pairs[:, 0], pairs[:, 1]) * n + np.maximum(pairs[:, 0], pairs[:, 1])
    return len(np.unique(keys)) == len(keys)


## random regular graphs

## whole-sample acceptance decays like exp(-(d^2 - 1) / 4), exp(-d(d - 1) / 2) for the bipartite union
UNIFORM_MAX_D = 5
BIPARTITE_UNIFORM_MAX_D = 4

def _pairing_attempt(n: int, d: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    stubs = rng.permutation(np.repeat(np.arange(n), d))
    pairs = stubs.reshape(-1, 2)
    return pairs if _pairs_are_simple(n, pairs) else None


def _incremental_attempt(n: int, d: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    ## pair stubs, keep the good pairs and reshuffle the leftovers until stuck
    edges = set()
    stubs = np.repeat(np.arange(n), d).tolist()
    while stubs:
        leftover = {}
        rng.shuffle(stubs)
        it = iter(stubs)
        for s1, s2 in zip(it, it):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover[s1] = leftover.get(s1, 0) + 1
                leftover[s2] = leftover.get(s2, 0) + 1
        if leftover and not _suitable(edges, leftover):
            return None
        stubs = [v for v, count in leftover.items() for _ in range(count)]
    return np.array(sorted(edges), dtype=np.int64)


def _suitable(edges: set, leftover: Dict[int, int]) -> bool:
    nodes = list(leftover)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            a, b = (s1, s2) if s1 < s2 else (s2, s1)
            if (a, b) not in edges:
                return True
    return False


def sample_regular(n: int, d: int, seed: SeedLike = None, retry_cap: int = 100000,
                   uniform: Optional[bool] = None) -> SimpleGraph:
    """
    random simple d-regular graph on n vertices. uniform sampling is the configuration model
    with whole-sample rejection, the default up to UNIFORM_MAX_D. otherwise the leftover stubs
    are re-paired, which is faster but not uniform, and meta["sampler"] says so
    """
    if (n * d) % 2:
        raise ParityViolation(f"n * d = {n * d} is odd")
    if not 1 <= d < n:
        raise ValueError(f"Need 1 <= d < n, got d={d}, n={n}")
    uniform = d <= UNIFORM_MAX_D if uniform is None else uniform
    rng = _rng(seed)
    attempt = _pairing_attempt if uniform else _incremental_attempt
    for tries in range(1, retry_cap + 1):
        pairs = attempt(n, d, rng)
        if pairs is not None:
            logger.debug("sample_regular(n=%d, d=%d) accepted after %d attempts", n, d, tries)
            sampler = {"method": "pairing" if uniform else "stub_repair", "uniform": uniform, "attempts": tries}
            return _from_pairs(n, pairs, name=f"regular({n},{d})", meta={"sampler": sampler})
    raise RetryCapExceeded(f"No simple {d}-regular graph on {n} vertices after {retry_cap} attempts")


def _repair_permutations(perms: List[np.ndarray], rng: np.random.Generator) -> int:
    ## one pass: any column repeating an earlier permutation's value gets swapped away
    k = len(perms)
    size = len(perms[0])
    swaps = 0
    offset = int(rng.integers(size))
    for step in range(size):
        i = (step + offset) % size
        seen = set()
        j_offset = int(rng.integers(k))
        for jj in range(k):
            p = perms[(jj + j_offset) % k]
            if int(p[i]) in seen:
                other = int(rng.integers(size))
                p[i], p[other] = p[other], p[i]
                swaps += 1
            seen.add(int(p[i]))
    return swaps


def sample_bipartite_regular(n: int, d: int, seed: SeedLike = None, retry_cap: int = 100000,
                             repair_passes: int = 100,
                             uniform: Optional[bool] = None) -> Tuple[SimpleGraph, BipartiteLayout]:
    """
    union of d random perfect matchings between the halves {0..n/2-1} and {n/2..n-1}.
    uniform sampling rejects the whole union until simple, the default up to
    BIPARTITE_UNIFORM_MAX_D; otherwise repeated columns are swapped away (not uniform)
    """
    if n % 2:
        raise ParityViolation(f"Bipartite sampling needs even n, got {n}")
    half = n // 2
    if not 1 <= d <= half:
        raise ValueError(f"Need 1 <= d <= n/2, got d={d}, n={n}")
    uniform = d <= BIPARTITE_UNIFORM_MAX_D if uniform is None else uniform
    rng = _rng(seed)
    layout = BipartiteLayout(left=tuple(range(half)), right=tuple(range(half, n)), permutation=tuple(range(n)))
    left = np.tile(np.arange(half), d)
    for tries in range(1, retry_cap + 1):
        perms = [rng.permutation(half) for _ in range(d)]
        if not uniform:
            for _ in range(repair_passes):
                if _repair_permutations(perms, rng) == 0:
                    break
        pairs = np.stack([left, half + np.concatenate(perms)], axis=1)
        if _pairs_are_simple(n, pairs):
            logger.debug("sample_bipartite_regular(n=%d, d=%d) accepted after %d attempts", n, d, tries)
            sampler = {"method": "matchings" if uniform else "matching_repair", "uniform": uniform, "attempts": tries}
            return _from_pairs(n, pairs, name=f"bipartite_regular({n},{d})", meta={"sampler": sampler}), layout
    raise RetryCapExceeded(f"No simple bipartite {d}-regular graph on {n} vertices after {retry_cap} attempts")


## lifts

@dataclass
class LiftedGraph:
    graph: Multigraph
    base: Multigraph
    sigma: np.ndarray
    m: int

    @property
    def k(self) -> int:
        return self.base.n

    @property
    def n(self) -> int:
        return self.graph.n

    def fiber(self, i: int) -> np.ndarray:
        return np.nonzero(self.sigma == i)[0]

    def indicator(self) -> np.ndarray:
        ## n x k, column i is the indicator of fiber i
        x = np.zeros((self.n, self.k))
        x[np.arange(self.n), self.sigma] = 1.0
        return x

    def fiber_vector(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)[self.sigma]

    def block_counts(self) -> np.ndarray:
        ## n x k, row u counts the edges from u into each fiber
        x = self.indicator()
        return self.graph.mult @ x

    def check_invariants(self):
        sizes = np.bincount(self.sigma, minlength=self.k)
        if np.any(sizes != self.m):
            raise ValueError(f"Fibers are not balanced: sizes {sizes.tolist()}")
        per_vertex = self.block_counts()
        expected = self.base.mult[self.sigma]
        if not np.array_equal(per_vertex.astype(np.int64), expected):
            bad = int(np.nonzero(np.any(per_vertex != expected, axis=1))[0][0])
            raise ValueError(f"Vertex {bad} does not see its base row {expected[bad].tolist()}")
        return True

    def containment_residual(self) -> float:
        """max over base eigenpairs (lam, v) of |A_G v_tilde - lam v_tilde|_inf"""
        values, vectors = np.linalg.eigh(self.base.mult.astype(float))
        a = self.graph.mult.astype(float)
        worst = 0.0
        for lam, v in zip(values, vectors.T):
            lifted = self.fiber_vector(v)
            worst = max(worst, float(np.max(np.abs(a @ lifted - lam * lifted))))
        return worst

    def to_dict(self) -> Dict[str, Any]:
        return {"graph": self.graph.to_dict(), "base": self.base.to_dict(), "sigma": self.sigma.tolist(), "m": self.m}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LiftedGraph":
        lift = cls(graph=graph_from_dict(data["graph"]), base=graph_from_dict(data["base"]),
                   sigma=np.array(data["sigma"], dtype=np.int64), m=int(data["m"]))
        lift.check_invariants()
        return lift


def _lift_attempt(h: Multigraph, m: int, rng: np.random.Generator) -> np.ndarray:
    k = h.n
    mult = np.zeros((k * m, k * m), dtype=np.int64)
    base = np.arange(m)
    for i in range(k):
        for _ in range(int(h.mult[i, i])):
            ## loop -> perfect matching inside fiber i
            pairs = (i * m + rng.permutation(m)).reshape(-1, 2)
            np.add.at(mult, (pairs[:, 0], pairs[:, 1]), 1)
            np.add.at(mult, (pairs[:, 1], pairs[:, 0]), 1)
        for j in range(i + 1, k):
            for _ in range(int(h.mult[i, j])):
                rows = i * m + base
                cols = j * m + rng.permutation(m)
                np.add.at(mult, (rows, cols), 1)
                np.add.at(mult, (cols, rows), 1)
    return mult


def random_lift(h: Multigraph, m: int, seed: SeedLike = None, require_simple: bool = True,
                retry_cap: int = 10000) -> LiftedGraph:
    """
    m-lift of h. vertex i*m + a is copy a of base vertex i, so sigma[u] = u // m.
    every parallel edge copy gets its own uniform perfect matching between fibers and every
    loop its own uniform perfect matching inside the fiber
    """
    d = h.require_regular()
    if m < 1:
        raise ValueError(f"Fiber size must be positive, got {m}")
    if h.has_loops() and m % 2:
        raise OddFiberWithLoops(f"Base has loops, fiber size {m} must be even")
    rng = _rng(seed)
    sigma = np.repeat(np.arange(h.n), m)
    for tries in range(1, retry_cap + 1):
        mult = _lift_attempt(h, m, rng)
        simple = not np.any(np.diag(mult)) and mult.max(initial=0) <= 1
        if simple:
            graph = SimpleGraph(mult, name=f"lift({h.name},{m})")
        elif not require_simple:
            graph = Multigraph(mult, name=f"lift({h.name},{m})")
        else:
            continue
        logger.debug("random_lift(%s, m=%d, d=%d) accepted after %d attempts", h.name, m, d, tries)
        return LiftedGraph(graph=graph, base=h, sigma=sigma, m=m)
    raise RetryCapExceeded(f"No simple {m}-lift of {h} after {retry_cap} attempts")


## noise

NOISE_MODES = ("rand", "rand_bi", "respectful_rand", "respectful_rand_bi", "adversarial", "respectful_adversarial")

Adversary = Callable[[Union[LiftedGraph, SimpleGraph], float, np.random.Generator], SimpleGraph]


@dataclass
class NoiseSpec:
    epsilon: float
    mode: str = "rand"
    retry_cap: int = 100
    adversary: Optional[Adversary] = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"Noise level {self.epsilon} must lie in [0, 1)")
        if self.mode not in NOISE_MODES:
            raise ValueError(f"Unknown noise mode {self.mode!r}, expected one of {', '.join(NOISE_MODES)}")
        if self.retry_cap < 1:
            raise ValueError(f"Retry cap must be positive, got {self.retry_cap}")

    @property
    def respectful(self) -> bool:
        return self.mode.startswith("respectful")

    @property
    def bipartite(self) -> bool:
        return self.mode.endswith("_bi")

    @property
    def adversarial(self) -> bool:
        return self.mode.endswith("adversarial")


def _graph_of(x) -> Multigraph:
    return x.graph if isinstance(x, LiftedGraph) else x


def _allowed_fn(lift: Optional[LiftedGraph], layout: Optional[BipartiteLayout]):
    side = layout.side_of() if layout is not None else None
    fibers_ok = (lift.base.mult > 0) if lift is not None else None
    sigma = lift.sigma if lift is not None else None

    def allowed(u: int, v: int) -> bool:
        if u == v:
            return False
        if side is not None and side[u] == side[v]:
            return False
        if fibers_ok is not None and not fibers_ok[sigma[u], sigma[v]]:
            return False
        return True
    return allowed


def _pairing_ok(pairs, present: set, allowed) -> bool:
    fresh = set()
    for u, v in pairs:
        key = (u, v) if u < v else (v, u)
        if not allowed(u, v) or key in present or key in fresh:
            return False
        fresh.add(key)
    return True


def _bad_pairs(pairs, present: set, allowed) -> List[int]:
    seen = {}
    bad = []
    for idx, (u, v) in enumerate(pairs):
        key = (u, v) if u < v else (v, u)
        if not allowed(u, v) or key in present or key in seen:
            bad.append(idx)
        seen.setdefault(key, idx)
    return bad


def _switching_repair(pairs: List[List[int]], present: set, allowed, rng: np.random.Generator,
                      bipartite: bool, cap: int) -> bool:
    ## swap endpoints between a bad new pair and a random other new pair until all are valid
    count = len(pairs)
    for _ in range(cap):
        bad = _bad_pairs(pairs, present, allowed)
        if not bad:
            return True
        i = bad[int(rng.integers(len(bad)))]
        j = int(rng.integers(count))
        if i == j:
            continue
        a, b = pairs[i]
        c, e = pairs[j]
        if bipartite or rng.random() < 0.5:
            pairs[i], pairs[j] = [a, e], [c, b]
        else:
            pairs[i], pairs[j] = [a, c], [b, e]
    return not _bad_pairs(pairs, present, allowed)


def _random_noise(g: SimpleGraph, spec: NoiseSpec, lift: Optional[LiftedGraph],
                  layout: Optional[BipartiteLayout], rng: np.random.Generator) -> Tuple[SimpleGraph, Dict[str, Any]]:
    n = g.n
    budget = math.floor(spec.epsilon * n)
    edges = g.edges()
    chosen = rng.choice(len(edges), size=budget, replace=False)
    removed = [edges[i] for i in sorted(chosen.tolist())]
    present = g.edge_set() - set(removed)
    allowed = _allowed_fn(lift if spec.respectful else None, layout)

    if spec.bipartite:
        side = layout.side_of()
        lefts = [u if side[u] == 0 else v for u, v in removed]
        rights = [v if side[u] == 0 else u for u, v in removed]
    else:
        stubs = [x for e in removed for x in e]

    pairs = None
    attempts = 0
    for attempts in range(1, spec.retry_cap + 1):
        if spec.bipartite:
            shuffled = [rights[i] for i in rng.permutation(len(rights))]
            candidate = [[u, v] for u, v in zip(lefts, shuffled)]
        else:
            order = rng.permutation(len(stubs))
            candidate = [[stubs[order[2 * i]], stubs[order[2 * i + 1]]] for i in range(budget)]
        if _pairing_ok(candidate, present, allowed):
            pairs = candidate
            break

    fallback = False
    if pairs is None:
        fallback = True
        logger.info("noise completion fell back to switching repair after %d attempts (n=%d, eps=%g)",
                    spec.retry_cap, n, spec.epsilon)
        if not _switching_repair(candidate, present, allowed, rng, spec.bipartite, cap=200 * max(budget, 1)):
            raise CompletionFailed(f"Could not complete {budget} deleted edges after {spec.retry_cap} resamples and switching repair")
        pairs = candidate

    adjacency = np.zeros((n, n), dtype=np.int64)
    for u, v in present:
        adjacency[u, v] = adjacency[v, u] = 1
    for u, v in pairs:
        adjacency[u, v] = adjacency[v, u] = 1
    meta = {"deleted": budget, "added": budget, "attempts": attempts, "switching_fallback": fallback}
    return SimpleGraph(adjacency, name=g.name), meta


def _validate_adversary_output(g: SimpleGraph, out, spec: NoiseSpec, lift: Optional[LiftedGraph]) -> SimpleGraph:
    if not isinstance(out, Multigraph) or out.n != g.n:
        raise AdversaryViolation("Adversary must return a graph on the same vertex set")
    if not out.is_simple():
        raise AdversaryViolation("Adversary returned a graph with loops or parallel edges")
    if out.regular_degree() != g.regular_degree():
        raise AdversaryViolation(f"Adversary broke {g.regular_degree()}-regularity")
    out = out if isinstance(out, SimpleGraph) else SimpleGraph(out.mult, name=out.name)
    distance = graph_distance(g, out)
    if distance > Fraction(spec.epsilon):
        raise AdversaryViolation(f"Adversary moved the graph by {float(distance)} > {spec.epsilon}")
    if spec.respectful:
        added = out.edge_set() - g.edge_set()
        for u, v in added:
            if lift.base.mult[lift.sigma[u], lift.sigma[v]] == 0:
                raise AdversaryViolation(f"Adversary added edge ({u}, {v}) between non-adjacent fibers")
    return out


def apply_noise(g: SimpleGraph, spec: NoiseSpec, base: Optional[LiftedGraph] = None,
                seed: SeedLike = None) -> SimpleGraph:
    """
    delete floor(eps n) uniform edges and add the same number back conditional on d-regularity
    (and on the side / fiber restrictions of the mode). the output carries meta["noise"]
    """
    d = g.require_regular()
    if not g.is_simple():
        raise ValueError("Noise operators act on simple graphs")
    if spec.respectful and base is None:
        raise MissingBase(f"Noise mode {spec.mode} needs the lift the graph came from")
    rng = _rng(seed)
    layout = None
    if spec.bipartite:
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"Noise mode {spec.mode} needs a bipartite input")
    g = g if isinstance(g, SimpleGraph) else SimpleGraph(g.mult, name=g.name)

    if spec.adversarial:
        adversary = spec.adversary
        if adversary is None:
            adversary = respectful_switching_adversary if spec.respectful else random_switching_adversary
        target = base if base is not None else g
        out = _validate_adversary_output(g, adversary(target, spec.epsilon, rng), spec, base)
        meta = {"deleted": None, "added": None, "attempts": 1, "switching_fallback": False,
                "adversary": getattr(adversary, "__name__", type(adversary).__name__)}
    elif math.floor(spec.epsilon * g.n) == 0:
        out = SimpleGraph(g.mult, name=g.name)
        meta = {"deleted": 0, "added": 0, "attempts": 0, "switching_fallback": False}
    else:
        out, meta = _random_noise(g, spec, base, layout, rng)

    distance = graph_distance(g, out)
    meta.update({"mode": spec.mode, "epsilon": spec.epsilon, "delta": fraction_str(distance), "d": d})
    out.meta = dict(getattr(g, "meta", {}))
    out.meta["noise"] = meta
    return out


## adversaries

def identity_adversary(target, epsilon: float, rng: np.random.Generator) -> SimpleGraph:
    g = _graph_of(target)
    return SimpleGraph(g.mult, name=g.name)


def _switchings(g: SimpleGraph, count: int, rng: np.random.Generator, allowed) -> SimpleGraph:
    ## each switching {a,b},{c,e} -> {a,c},{b,e} moves 4 edge slots
    edges = g.edges()
    present = set(edges)
    done = 0
    for _ in range(100 * max(count, 1)):
        if done >= count:
            break
        i, j = rng.choice(len(edges), size=2, replace=False)
        a, b = edges[i]
        c, e = edges[j]
        if len({a, b, c, e}) < 4:
            continue
        if rng.random() < 0.5:
            c, e = e, c
        new1 = (min(a, c), max(a, c))
        new2 = (min(b, e), max(b, e))
        if new1 in present or new2 in present or not allowed(a, c) or not allowed(b, e):
            continue
        present -= {edges[i], edges[j]}
        present |= {new1, new2}
        edges[i], edges[j] = new1, new2
        done += 1
    if done < count:
        logger.info("switching adversary applied %d of %d switchings", done, count)
    return SimpleGraph.from_edges(g.n, sorted(present), name=g.name)


def random_switching_adversary(target, epsilon: float, rng: np.random.Generator) -> SimpleGraph:
    g = _graph_of(target)
    return _switchings(g, math.floor(epsilon * g.n / 2), rng, lambda u, v: u != v)


def respectful_switching_adversary(target, epsilon: float, rng: np.random.Generator) -> SimpleGraph:
    if not isinstance(target, LiftedGraph):
        raise MissingBase("Respectful switching needs the lift the graph came from")
    g = target.graph
    return _switchings(g, math.floor(epsilon * g.n / 2), rng, _allowed_fn(target, None))


## detection

@dataclass
class DetectionResult(Record):
    type_I: float
    type_II: float
    threshold: float
    trials: int
    seed: int
    larger_is_planted: bool
    null_stats: List[float]
    planted_stats: List[float]

    @property
    def total_error(self) -> float:
        return self.type_I + self.type_II

    def roc(self, thresholds=None) -> List[Tuple[float, float, float]]:
        """(threshold, type_I, type_II) rows over every observed statistic value"""
        null = np.array(self.null_stats)
        planted = np.array(self.planted_stats)
        if thresholds is None:
            thresholds = np.unique(np.concatenate([null, planted, [self.threshold]]))
        rows = []
        for thr in thresholds:
            if self.larger_is_planted:
                t1 = float(np.mean(null > thr))
                t2 = float(np.mean(planted <= thr))
            else:
                t1 = float(np.mean(null < thr))
                t2 = float(np.mean(planted >= thr))
            rows.append((float(thr), t1, t2))
        return rows


def spectral_radius_statistic(x) -> float:
    return spectral_radius(_graph_of(x))


def eigenvalue_membership_statistic(value: float, tol: float = 1e-6) -> Callable[[Any], float]:
    """1.0 when value is an eigenvalue of the graph (within tol), else 0.0"""
    def statistic(x) -> float:
        eig = np.linalg.eigvalsh(_graph_of(x).mult.astype(float))
        return 1.0 if float(np.min(np.abs(eig - value))) <= tol else 0.0
    statistic.__name__ = f"eigenvalue_membership({value:.6f})"
    return statistic


def detect_experiment(null_sampler: Callable[[int], Any], planted_sampler: Callable[[int], Any],
                      statistic: Optional[Callable[[Any], float]] = None, threshold: Optional[float] = None,
                      trials: int = 20, seed: int = 0, threads: int = 1, margin: float = 0.05,
                      larger_is_planted: bool = True) -> DetectionResult:
    """
    thresholded-statistic test between two samplers. trial t draws the null graph from
    derive_seed(seed, t, 0) and the planted one from derive_seed(seed, t, 1), so results do not
    depend on the thread count. default: spectral radius against 2 sqrt(d - 1) + margin
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    statistic = statistic or spectral_radius_statistic

    def one_trial(t: int) -> Tuple[float, float, int]:
        g0 = null_sampler(derive_seed(seed, t, 0))
        g1 = planted_sampler(derive_seed(seed, t, 1))
        return float(statistic(g0)), float(statistic(g1)), _graph_of(g0).require_regular()

    logger.info("detect_experiment: %d trials, seed %d, %d threads", trials, seed, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(one_trial, range(trials)))

    null_stats = [r[0] for r in results]
    planted_stats = [r[1] for r in results]
    if threshold is None:
        threshold = 2.0 * math.sqrt(results[0][2] - 1) + margin
    null = np.array(null_stats)
    planted = np.array(planted_stats)
    if larger_is_planted:
        type_I = float(np.mean(null > threshold))
        type_II = float(np.mean(planted <= threshold))
    else:
        type_I = float(np.mean(null < threshold))
        type_II = float(np.mean(planted >= threshold))
    return DetectionResult(type_I=type_I, type_II=type_II, threshold=float(threshold), trials=trials, seed=seed,
                           larger_is_planted=larger_is_planted, null_stats=null_stats, planted_stats=planted_stats)
