## TITLE: liftbench path statistics sdp
## CC: okzyrox
## LICENSE: MIT

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .ensembles import LiftedGraph, NoiseSpec, apply_noise, derive_seed
from .errors import Disconnected, KernelMomentFailure, LayoutMissing, RepairInfeasible, SCapExceeded
from .graph_core import BipartiteLayout, Multigraph, find_bipartition
from .serial import Record, parse_fraction
from .spectral import bad_vertices, chebyshev_eval, graph_spectrum, km_integrate, nb_coefficients, nb_matrices, \
    nb_norm_sq, nb_values

logger = logging.getLogger(__name__)

PSD_TOL = 1e-8
EQ_TOL = 1e-8
DEFAULT_C0 = 1.0
S_CAP = 64
LP_DEGREE_CAP = 16
WITNESS_MODES = ("kernel", "lp", "window", "auto")


@dataclass
class PathStatsInstance(Record):
    D: int
    delta: float
    k: int
    base_spectrum: np.ndarray
    bipartite: bool = False
    d: int = field(init=False)

    def __post_init__(self):
        self.base_spectrum = np.sort(np.asarray(self.base_spectrum, dtype=float))[::-1]
        if self.D < 0:
            raise ValueError(f"Level D must be nonnegative, got {self.D}")
        if not self.delta > 0:
            raise ValueError(f"Tolerance delta must be positive, got {self.delta}")
        if len(self.base_spectrum) != self.k:
            raise ValueError(f"Base spectrum has {len(self.base_spectrum)} values, expected k = {self.k}")
        self.d = int(round(self.base_spectrum[0]))
        if self.d < 2 or abs(self.base_spectrum[0] - self.d) > 1e-8:
            raise ValueError(f"Base spectrum must start at the degree d, got {self.base_spectrum[0]}")
        has_minus_d = abs(self.base_spectrum[-1] + self.d) <= 1e-8
        if has_minus_d != self.bipartite:
            raise ValueError(f"Base spectrum {'lacks' if self.bipartite else 'contains'} -d = {-self.d} "
                             f"but bipartite = {self.bipartite}")
        if self.bipartite and self.k < 3:
            raise ValueError(f"Bipartite instances need k >= 3, got {self.k}")

    @classmethod
    def from_base(cls, h: Multigraph, D: int, delta: float, bipartite: bool = False) -> "PathStatsInstance":
        h.require_regular()
        values = np.linalg.eigvalsh(h.mult.astype(float))
        return cls(D=D, delta=delta, k=h.n, base_spectrum=values, bipartite=bipartite)

    @classmethod
    def symmetric(cls, lam: float, d: int, k: int, D: int, delta: float, bipartite: bool = False) -> "PathStatsInstance":
        """every nontrivial base eigenvalue set to lam"""
        if abs(lam) > d + 1e-9:
            raise ValueError(f"Symmetric eigenvalue must satisfy |lambda| <= d = {d}, got {lam}")
        trivial = [float(d), -float(d)] if bipartite else [float(d)]
        return cls(D=D, delta=delta, k=k, base_spectrum=np.array(trivial + [float(lam)] * (k - len(trivial))),
                   bipartite=bipartite)

    @property
    def t0(self) -> float:
        ## diagonal of Y = P - J/k (bipartite: P - (J + S)/k)
        return (self.k - 2) / self.k if self.bipartite else (self.k - 1) / self.k

    @property
    def nontrivial(self) -> np.ndarray:
        rest = self.base_spectrum[1:]
        return rest[:-1] if self.bipartite else rest

    @property
    def ramanujan(self) -> bool:
        rest = self.nontrivial
        return not len(rest) or float(np.max(np.abs(rest))) <= 2.0 * math.sqrt(self.d - 1) + 1e-9

    def targets(self, upto: Optional[int] = None) -> np.ndarray:
        """(1/k) sum_i q_s(lambda_i) for s = 0..upto, the per-vertex moment targets"""
        upto = self.D if upto is None else upto
        return nb_values(self.base_spectrum, upto, self.d).sum(axis=1) / self.k

    def nontrivial_targets(self, upto: Optional[int] = None) -> np.ndarray:
        upto = self.D if upto is None else upto
        return nb_values(self.nontrivial, upto, self.d).sum(axis=1) / self.k


@dataclass
class PseudoPartition:
    matrix: np.ndarray
    log: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _as_matrix(p) -> np.ndarray:
    return p.matrix if isinstance(p, PseudoPartition) else np.asarray(p, dtype=float)


@dataclass
class ConstraintCheck(Record):
    name: str
    value: float
    target: float
    window: float
    passed: bool

    @property
    def residual(self) -> float:
        return self.value - self.target

    def to_dict(self) -> Dict[str, Any]:
        out = super().to_dict()
        out["residual"] = self.residual
        return out


def _check(name: str, value: float, target: float, window: float) -> ConstraintCheck:
    return ConstraintCheck(name, float(value), float(target), float(window), bool(abs(value - target) <= window))


def _psd_check(name: str, matrix: np.ndarray, n: int) -> ConstraintCheck:
    ## one-sided, value is the smallest eigenvalue
    low = float(np.linalg.eigvalsh(matrix)[0])
    return ConstraintCheck(name, low, 0.0, PSD_TOL * n, bool(low >= -PSD_TOL * n))


@dataclass
class FeasibilityReport(Record):
    passed: bool
    n: int
    delta: float
    slack_abs: float
    c0: float
    checks: List[ConstraintCheck] = field(default_factory=list)

    def failed(self) -> List[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def by_name(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def slack_for(n: int, c0: float) -> float:
    return c0 * math.log(n) if n > 1 else 0.0


def path_stats_check(g: Multigraph, p, instance: PathStatsInstance, c0: float = DEFAULT_C0,
                     matrices: Optional[List[np.ndarray]] = None, threads: int = 1) -> FeasibilityReport:
    """every Path Statistics constraint on P with its residual"""
    matrix = _as_matrix(p)
    n = g.n
    if matrix.shape != (n, n):
        raise ValueError(f"Pseudo-partition has shape {matrix.shape}, graph has {n} vertices")
    d = g.require_regular()
    if d != instance.d:
        raise ValueError(f"Graph degree {d} does not match instance degree {instance.d}")
    k = instance.k
    slack = slack_for(n, c0)
    checks = [
        ConstraintCheck("diagonal", float(np.max(np.abs(np.diag(matrix) - 1.0))), 0.0, EQ_TOL,
                        bool(np.max(np.abs(np.diag(matrix) - 1.0)) <= EQ_TOL)),
        _check("J", float(matrix.sum()), n * n / k, EQ_TOL * n * n),
    ]
    if matrices is None:
        matrices = nb_matrices(g, instance.D)
    targets = instance.targets() * n

    def moment(s: int) -> ConstraintCheck:
        window = 0.0 if s == 0 else instance.delta * n + slack
        return _check(f"moment_{s}", float(np.vdot(matrix, matrices[s])), targets[s], max(window, EQ_TOL * n))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        checks.extend(pool.map(moment, range(instance.D + 1)))
    checks.append(_psd_check("psd", matrix - np.ones((n, n)) / k, n))
    if instance.bipartite:
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"{g} is not bipartite")
        left, right = list(layout.left), list(layout.right)
        cross = float(np.max(np.abs(matrix[np.ix_(left, right)]))) if left and right else 0.0
        checks.append(ConstraintCheck("cross_blocks", cross, 0.0, EQ_TOL, bool(cross <= EQ_TOL)))
        checks.append(_psd_check("psd_signed", matrix - layout.signed_projector() / k, n))
    passed = all(c.passed for c in checks)
    logger.debug("path statistics on %s at delta %g: %s", g, instance.delta, "pass" if passed else "fail")
    return FeasibilityReport(passed, n, instance.delta, slack, c0, checks)


def planted_witness(lift: LiftedGraph) -> PseudoPartition:
    x = lift.indicator()
    return PseudoPartition(x @ x.T, {"source": "planted", "m": lift.m, "k": lift.k})


## witness polynomials

def _kernel_rows(lam: float, x: np.ndarray, S: int, d: int) -> np.ndarray:
    ## K_S(lam, x) = sum_s q_s(lam) q_s(x) / ||q_s||^2
    norms = np.array([nb_norm_sq(s, d) for s in range(S + 1)], dtype=float)
    weights = nb_values([lam], S, d)[:, 0] / norms
    return weights @ nb_values(x, S, d)


def kernel_surrogate(lam: float, S: int, d: int) -> Callable[[np.ndarray], np.ndarray]:
    """normalised squared kernel K_S(lam, x)^2 / K_S(lam, lam), nonnegative with unit KM mass"""
    peak = float(_kernel_rows(lam, np.array([lam]), S, d)[0])

    def g(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _kernel_rows(lam, x, S, d) ** 2 / peak

    return g


def _even_part(func: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: 0.5 * (func(x) + func(-np.asarray(x, dtype=float)))


def kernel_polynomial(instance: PathStatsInstance, n: int) -> Tuple[Callable[[np.ndarray], np.ndarray], Dict[str, Any]]:
    d, k, D = instance.d, instance.k, instance.D
    tol = instance.delta / 4.0
    lams = instance.nontrivial
    distinct = np.unique(np.round(lams, 10))
    S = max(2, D + (D % 2))
    while S <= S_CAP:
        surrogates = {}
        worst = 0.0
        for lam in distinct:
            g_lam = kernel_surrogate(float(lam), S, d)
            if instance.bipartite:
                g_lam = _even_part(g_lam)
            surrogates[float(lam)] = g_lam
            expected = nb_values([lam], D, d)[:, 0]
            if instance.bipartite:
                expected = expected * (1 - np.arange(D + 1) % 2)
            for s in range(D + 1):
                got = km_integrate(lambda x, s=s: g_lam(x) * nb_values(x, s, d)[s], d)
                worst = max(worst, abs(got - expected[s]))
        picks = [surrogates[float(lam)] for lam in np.round(lams, 10)]

        def g(x, picks=picks):
            return sum(p(x) for p in picks) / k

        g_at_d = float(g(np.array([float(d)]))[0])
        logger.debug("kernel degree %d: worst moment error %.3g, g(d) = %.3g", S, worst, g_at_d)
        if worst <= tol and g_at_d / n < instance.t0 / 2.0:
            return g, {"mode": "kernel", "degree": S, "moment_error": worst, "g_d": g_at_d}
        S *= 2
    raise KernelMomentFailure(f"Kernel surrogate missed the delta/4 = {tol:g} moment window up to degree {S_CAP}")


def lp_polynomial(instance: PathStatsInstance, graph_values: np.ndarray, n: int,
                  grid_size: int = 200) -> Tuple[Callable[[np.ndarray], np.ndarray], Dict[str, Any]]:
    """
    nonnegative g = sum c_s q_s matching the nontrivial moments on the graph's own spectrum.
    graph_values are the nontrivial eigenvalues of the input graph; g(d) is minimised
    """
    d, D = instance.d, instance.D
    tol = instance.delta / 4.0
    wanted = instance.nontrivial_targets()
    edge = 2.0 * math.sqrt(d - 1)
    grid = np.linspace(-edge, edge, grid_size)
    L = D + (D % 2)
    L = max(L, 2)
    while L <= LP_DEGREE_CAP:
        free = [s for s in range(L + 1) if not (instance.bipartite and s % 2)]
        basis_graph = nb_values(graph_values, L, d)[free]
        moments = nb_values(graph_values, D, d)
        ## empirical moments (1/n) sum_r g(mu_r) q_s(mu_r) are linear in c
        rows = (moments @ basis_graph.T) / n
        a_eq = rows[:1]
        b_eq = [instance.t0]
        ## block diagonal witnesses have zero odd moments, only even levels are matched
        levels = [s for s in range(1, D + 1) if not (instance.bipartite and s % 2)]
        a_ub = [rows[levels], -rows[levels]]
        b_ub = [wanted[levels] + tol, -(wanted[levels] - tol)]
        a_ub.append(-basis_graph.T)
        b_ub.append(np.zeros(len(graph_values)))
        a_ub.append(-nb_values(grid, L, d)[free].T)
        b_ub.append(np.zeros(grid_size))
        objective = nb_values([float(d)], L, d)[free, 0]
        result = linprog(objective, A_ub=np.vstack(a_ub), b_ub=np.concatenate(b_ub), A_eq=a_eq, b_eq=b_eq,
                         bounds=[(None, None)] * len(free), method="highs")
        if result.status == 0:
            coeffs = np.zeros(L + 1)
            coeffs[free] = result.x

            def g(x, coeffs=coeffs, L=L):
                return coeffs @ nb_values(x, L, d)

            return g, {"mode": "lp", "degree": L, "g_d": float(result.fun), "coefficients": coeffs.tolist()}
        logger.debug("lp witness degree %d: %s", L, result.message)
        L += 2
    raise KernelMomentFailure(f"No nonnegative moment-matched polynomial up to degree {LP_DEGREE_CAP}")


## gram repair

def _unit_off(seeds: Sequence[np.ndarray], against: List[np.ndarray], dim: int) -> np.ndarray:
    """a unit vector orthogonal to everything in against, built from the seeds or coordinate axes"""
    def project(v):
        for a in against:
            v = v - np.dot(v, a) * a
        return v

    for seed in seeds:
        v = project(np.asarray(seed, dtype=float))
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        v = project(e)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v / norm
    raise RepairInfeasible("Gram vectors span too few dimensions for the repair")


def gram_repair(rows: np.ndarray, target: float, tol: float = 0.05, margin: float = 0.05) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    new Gram vectors with squared norm target and zero sum.
    rows off by more than tol (relative) are rebuilt, the rest are rescaled
    """
    rows = np.asarray(rows, dtype=float)
    size, dim = rows.shape
    norms_sq = np.einsum("ij,ij->i", rows, rows)
    deviation = np.abs(norms_sq / target - 1.0)
    repair = set(np.nonzero(deviation > tol)[0].tolist())
    good = np.ones(size, dtype=bool)
    good[list(repair)] = False
    out = rows.copy()
    out[good] *= np.sqrt(target / norms_sq[good])[:, None]
    radius = math.sqrt(target)
    initial = len(repair)

    sigma = -out[good].sum(axis=0)
    while True:
        m = len(repair)
        norm = float(np.linalg.norm(sigma))
        if m == 0 and norm <= 1e-10 * max(1, size):
            return out, {"repaired": 0, "enlarged": 0, "max_deviation": float(deviation.max(initial=0.0))}
        if m >= 2 and norm < m * radius * (1.0 - margin):
            break
        candidates = np.nonzero(good)[0]
        if not len(candidates):
            raise RepairInfeasible(f"Repair set grew to all {size} vertices without a feasible sum")
        ## the good vertex pointing most against sigma shrinks it most
        u = int(candidates[np.argmin(out[candidates] @ sigma)])
        good[u] = False
        repair.add(u)
        sigma = sigma + out[u]

    members = sorted(repair)
    m = len(members)
    mean = sigma / m
    rho = math.sqrt(max(target - float(np.dot(mean, mean)), 0.0))
    axis = [sigma / np.linalg.norm(sigma)] if np.linalg.norm(sigma) > 1e-12 else []
    start = 0
    if m % 2:
        a, b, c = members[:3]
        w1 = _unit_off([rows[a] - rows[b], rows[a]], axis, dim)
        w2 = _unit_off([rows[b] - rows[c], rows[c]], axis + [w1], dim)
        half = math.sqrt(3.0) / 2.0
        out[a] = mean + rho * w1
        out[b] = mean + rho * (-0.5 * w1 + half * w2)
        out[c] = mean + rho * (-0.5 * w1 - half * w2)
        start = 3
    for idx in range(start, m, 2):
        a, b = members[idx], members[idx + 1]
        w = _unit_off([rows[a] - rows[b], rows[a]], axis, dim)
        out[a] = mean + rho * w
        out[b] = mean - rho * w
    if m > initial:
        logger.info("gram repair enlarged the repair set from %d to %d vertices", initial, m)
    return out, {"repaired": m, "enlarged": m - initial, "max_deviation": float(deviation.max(initial=0.0))}


def _trivial_index(vectors: np.ndarray, direction: np.ndarray, taken: Sequence[int] = ()) -> int:
    overlap = np.abs(vectors.T @ direction)
    overlap[list(taken)] = -1.0
    return int(np.argmax(overlap))


## window witnesses

WINDOW_SIZES = (8, 32)
BALANCE_ITERS = 500
BALANCE_TOL = 1e-10


def nb_apply(adj, x: np.ndarray, D: int, d: int) -> List[np.ndarray]:
    """q_0(A) x .. q_D(A) x by the non-backtracking recurrence, adj sparse"""
    out = [x]
    if D >= 1:
        out.append(adj @ x)
    if D >= 2:
        out.append(adj @ out[1] - d * x)
    for s in range(2, D):
        out.append(adj @ out[s] - (d - 1) * out[s - 1])
    return out


def matrix_moments(adj, y: np.ndarray, D: int, d: int) -> np.ndarray:
    """<Y, q_s(A)> for s = 0..D"""
    return np.array([float(np.trace(p)) for p in nb_apply(adj, y, D, d)])


def balance_factor(rows: np.ndarray, basis: np.ndarray, iters: int = BALANCE_ITERS,
                   tol: float = BALANCE_TOL) -> np.ndarray:
    """
    unit rows whose columns are orthogonal to the (orthonormal) basis columns, by alternating
    row scaling and column projection. F F^T then has unit diagonal and kills the basis
    """
    out = rows - basis @ (basis.T @ rows)
    for _ in range(iters):
        norms = np.sqrt(np.einsum("ij,ij->i", out, out))
        if norms.min() <= 1e-12:
            raise RepairInfeasible("Window factor has a vanishing row")
        out = out / norms[:, None]
        if float(np.max(np.abs(basis.T @ out))) <= tol:
            return out
        out = out - basis @ (basis.T @ out)
    raise RepairInfeasible(f"Window factor did not balance in {iters} rounds")


@dataclass
class WindowBasis:
    """
    unit-diagonal PSD pieces orthogonal to the trivial directions: balanced Gram factors over
    runs of consecutive nontrivial eigenvectors, plus the scaled projector onto all of them (last).
    moments are per vertex, one row per piece
    """
    factors: List[np.ndarray]
    spans: List[Tuple[float, float]]
    projector: np.ndarray
    moments: np.ndarray
    block_diagonal: bool = False

    def __len__(self) -> int:
        return len(self.factors) + 1

    def fit(self, wanted: np.ndarray, levels: Sequence[int]) -> Tuple[np.ndarray, float]:
        """convex weights with per-vertex moments closest to wanted on the levels, max norm"""
        count = len(self)
        levels = list(levels)
        theta = np.zeros(count)
        if not levels:
            theta[-1] = 1.0
            return theta, 0.0
        wanted = np.asarray(wanted, dtype=float)
        rows = self.moments[:, levels].T
        ones = np.ones((len(levels), 1))
        a_ub = np.vstack([np.hstack([rows, -ones]), np.hstack([-rows, -ones])])
        b_ub = np.concatenate([wanted[levels], -wanted[levels]])
        a_eq = np.hstack([np.ones((1, count)), np.zeros((1, 1))])
        objective = np.zeros(count + 1)
        objective[-1] = 1.0
        result = linprog(objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                         bounds=[(0, None)] * (count + 1), method="highs")
        if result.status != 0:
            raise RepairInfeasible(f"Window combination failed: {result.message}")
        theta = np.where(result.x[:count] > 1e-12, result.x[:count], 0.0)
        theta /= theta.sum()
        error = float(np.max(np.abs(theta @ self.moments[:, levels] - wanted[levels])))
        return theta, error

    def gram(self, theta: np.ndarray) -> np.ndarray:
        out = theta[-1] * self.projector
        for weight, factor in zip(theta[:-1], self.factors):
            if weight > 0:
                out = out + weight * (factor @ factor.T)
        return out


def window_basis(g: Multigraph, D: int, layout: Optional[BipartiteLayout] = None, block_diagonal: bool = False,
                 sizes: Sequence[int] = WINDOW_SIZES,
                 spectrum: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> WindowBasis:
    """
    pieces orthogonal to 1 (and to the sign vector when a layout is given). block_diagonal
    pieces have no entries between the two sides
    """
    d = g.require_regular()
    n = g.n
    if block_diagonal and layout is None:
        raise LayoutMissing("Block diagonal windows need a bipartition")
    values, vectors = np.linalg.eigh(g.mult.astype(float)) if spectrum is None else spectrum
    taken = [_trivial_index(vectors, np.ones(n))]
    directions = [np.ones(n) / math.sqrt(n)]
    masks = None
    if layout is not None:
        sign = layout.sign_vector().astype(float)
        taken.append(_trivial_index(vectors, sign, taken))
        directions.append(sign / math.sqrt(n))
        if block_diagonal:
            side = layout.side_of()
            masks = [(side == 0).astype(float), (side == 1).astype(float)]
    basis = np.column_stack(directions)
    keep = np.setdiff1d(np.arange(n), taken)
    mu, w = values[keep], vectors[:, keep]
    adj = sparse.csr_matrix(g.mult.astype(float))

    factors, spans, rows_out = [], [], []
    for size in sizes:
        if size > len(keep):
            continue
        starts = list(range(0, len(keep) - size + 1, max(1, size // 2)))
        if starts[-1] != len(keep) - size:
            starts.append(len(keep) - size)
        for lo in starts:
            rows = w[:, lo:lo + size]
            if masks is not None:
                rows = np.hstack([rows * m[:, None] for m in masks])
            try:
                factor = balance_factor(rows, basis)
            except RepairInfeasible as e:
                logger.debug("window %d..%d skipped: %s", lo, lo + size, e)
                continue
            factors.append(factor)
            spans.append((float(mu[lo]), float(mu[lo + size - 1])))
            rows_out.append([float(np.vdot(factor, p)) / n for p in nb_apply(adj, factor, D, d)])

    scale = n / (n - basis.shape[1])
    projector = scale * (np.eye(n) - basis @ basis.T)
    rows_out.append((scale * nb_values(mu, D, d).sum(axis=1) / n).tolist())
    logger.debug("window basis on %s: %d windows, block diagonal %s", g, len(factors), block_diagonal)
    return WindowBasis(factors, spans, projector, np.array(rows_out, dtype=float), block_diagonal)


def window_witness(g: Multigraph, instance: PathStatsInstance, layout: Optional[BipartiteLayout] = None,
                   basis: Optional[WindowBasis] = None,
                   spectrum: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Y = t0 sum theta_j F_j F_j^T, the convex combination of window pieces nearest the moment targets"""
    if basis is None:
        basis = window_basis(g, instance.D, layout, block_diagonal=instance.bipartite, spectrum=spectrum)
    ## block diagonal pieces have no odd moments
    levels = [s for s in range(1, instance.D + 1) if not (instance.bipartite and s % 2)]
    theta, error = basis.fit(instance.nontrivial_targets() / instance.t0, levels)
    y = instance.t0 * basis.gram(theta)
    return y, {"mode": "window", "windows": int(np.count_nonzero(theta[:-1])),
               "projector_weight": float(theta[-1]), "fit_error": instance.t0 * error}


def _polynomial_witness(instance: PathStatsInstance, mode: str, mu: np.ndarray, w: np.ndarray, n: int,
                        blocks: List[np.ndarray], repair_tol: float, margin: float) -> Tuple[np.ndarray, Dict[str, Any]]:
    poly, log = kernel_polynomial(instance, n) if mode == "kernel" else lp_polynomial(instance, mu, n)
    g_values = poly(mu)
    clipped = float(-g_values[g_values < 0].sum())
    g_values = np.clip(g_values, 0.0, None)
    trace = float(g_values.sum())
    if trace <= 0:
        raise KernelMomentFailure("Witness polynomial vanishes on the nontrivial spectrum")
    scale = n * instance.t0 / trace
    gram = w * np.sqrt(scale * g_values)[None, :]
    log.update({"scale": scale, "clipped": clipped})

    y = np.zeros((n, n))
    repaired = enlarged = 0
    for block in blocks:
        rows, info = gram_repair(gram[block], instance.t0, tol=repair_tol, margin=margin)
        y[np.ix_(block, block)] = rows @ rows.T
        repaired += info["repaired"]
        enlarged += info["enlarged"]
    log.update({"repaired": repaired, "enlarged": enlarged})
    return y, log


def null_witness(g: Multigraph, instance: PathStatsInstance, mode: str = "auto", repair_tol: float = 0.05,
                 margin: float = 0.05, c0: float = DEFAULT_C0) -> PseudoPartition:
    """
    spectral witness P = Y + J/k (+ S/k). kernel and lp shape Y with a witness polynomial of the
    adjacency and repair its diagonal, window mixes eigenvector windows. every Y is checked against
    the moment windows before it is returned; auto tries kernel, lp and window in turn
    """
    if mode not in WITNESS_MODES:
        raise ValueError(f"Unknown witness mode {mode!r}, expected one of {', '.join(WITNESS_MODES)}")
    d = g.require_regular()
    if d != instance.d:
        raise ValueError(f"Graph degree {d} does not match instance degree {instance.d}")
    if not g.is_connected():
        raise Disconnected(f"{g} is disconnected")
    n, k = g.n, instance.k
    layout = None
    if instance.bipartite:
        layout = find_bipartition(g)
        if layout is None:
            raise LayoutMissing(f"{g} is not bipartite")

    values, vectors = np.linalg.eigh(g.mult.astype(float))
    taken = [_trivial_index(vectors, np.ones(n))]
    if layout is not None:
        taken.append(_trivial_index(vectors, layout.sign_vector().astype(float), taken))
    keep = np.setdiff1d(np.arange(n), taken)
    blocks = [np.arange(n)] if layout is None else [np.array(layout.left), np.array(layout.right)]
    adj = sparse.csr_matrix(g.mult.astype(float))
    wanted = instance.nontrivial_targets() * n
    window = instance.delta * n + slack_for(n, c0)

    error = None
    for attempt in (("kernel", "lp", "window") if mode == "auto" else (mode,)):
        try:
            if attempt == "window":
                y, log = window_witness(g, instance, layout, spectrum=(values, vectors))
            else:
                y, log = _polynomial_witness(instance, attempt, values[keep], vectors[:, keep], n, blocks,
                                             repair_tol, margin)
        except (KernelMomentFailure, RepairInfeasible) as e:
            if mode != "auto":
                raise
            logger.info("%s witness failed (%s), trying the next mode", attempt, e)
            error = e
            continue
        residuals = matrix_moments(adj, y, instance.D, d)[1:] - wanted[1:]
        worst = int(np.argmax(np.abs(residuals))) if len(residuals) else 0
        if not len(residuals) or abs(residuals[worst]) <= max(window, EQ_TOL * n):
            break
        error = RepairInfeasible(f"{attempt.capitalize()} witness leaves moment_{worst + 1} off by "
                                 f"{residuals[worst]:.4g}, window {window:.4g}")
        if mode != "auto":
            raise error
        logger.info("%s, trying the next mode", error)
    else:
        raise error

    log.update({"source": "null", "requested_mode": mode, "moment_residuals": residuals.tolist(),
                "bad_vertices": len(bad_vertices(g, instance.D, instance.D))})
    matrix = y + np.ones((n, n)) / k
    if layout is not None:
        matrix += layout.signed_projector() / k
    logger.info("null witness on %s: %s mode, worst moment residual %.4g", g, log["mode"],
                float(np.max(np.abs(residuals), initial=0.0)))
    return PseudoPartition(matrix, log)


## infeasibility

@dataclass
class InfeasibilityCertificate(Record):
    S: int
    delta_star: float
    nontrivial_sum: float
    coefficients: np.ndarray
    d: int
    k: int
    bulk_minimum: float
    nonnegative_on_graph: Optional[bool] = None

    @property
    def applies_at_level(self) -> int:
        ## the expansion of f uses q_0..q_S, so D >= S is needed
        return self.S

    def f(self, x):
        return 2.0 - chebyshev_eval(self.S, np.asarray(x, dtype=float) / (2.0 * math.sqrt(self.d - 1)))

    def dual_value(self, delta: float, n: int, slack_abs: float = 0.0) -> float:
        """upper estimate of <P, f(A)> minus its PSD lower estimate, negative means a contradiction"""
        return (n / self.k) * self.nontrivial_sum + (delta * n + slack_abs) * float(np.abs(self.coefficients).sum())

    def refutes(self, delta: float, n: int, slack_abs: float = 0.0, level: Optional[int] = None) -> bool:
        if level is not None and level < self.S:
            return False
        return self.dual_value(delta, n, slack_abs) < 0

    def to_dict(self) -> Dict[str, Any]:
        out = super().to_dict()
        out["applies_at_level"] = self.applies_at_level
        return out


def infeasibility_certificate(g: Optional[Multigraph], instance: PathStatsInstance,
                              s_cap: int = S_CAP) -> Optional[InfeasibilityCertificate]:
    """Chebyshev dual certificate, None when the base spectrum is Ramanujan"""
    if instance.ramanujan:
        return None
    d, k = instance.d, instance.k
    radius = 2.0 * math.sqrt(d - 1)
    lams = instance.nontrivial
    for S in range(2, s_cap + 1, 2):
        total = float((2.0 - chebyshev_eval(S, lams / radius)).sum())
        logger.debug("certificate degree %d: nontrivial sum %.6g", S, total)
        if total < 0:
            break
    else:
        raise SCapExceeded(f"No Chebyshev certificate up to degree {s_cap}")

    def f(x):
        return 2.0 - chebyshev_eval(S, np.asarray(x, dtype=float) / radius)

    coefficients = nb_coefficients(f, d, S)
    delta_star = -total / k / float(np.abs(coefficients).sum())
    bulk = float(f(np.linspace(-radius, radius, 2001)).min())
    nonnegative = None
    if g is not None:
        spectrum = graph_spectrum(g, bipartite=instance.bipartite)
        nonnegative = bool(np.all(f(spectrum.nontrivial) >= -1e-9))
    cert = InfeasibilityCertificate(S, delta_star, total, coefficients, d, k, bulk, nonnegative)
    logger.info("infeasibility certificate at degree %d, delta* = %.4g", S, delta_star)
    return cert


## symmetric variant

@dataclass
class SymmetricDecision(Record):
    lam: float
    decision: str
    report: Optional[FeasibilityReport] = None
    certificate: Optional[InfeasibilityCertificate] = None
    witness_log: Dict[str, Any] = field(default_factory=dict)


def symmetric_path_stats(g: Multigraph, lam: float, D: int, delta: float, bipartite: bool = False, k: int = 2,
                         mode: str = "auto", c0: float = DEFAULT_C0) -> SymmetricDecision:
    """feasible when a witness passes, infeasible when a certificate applies at level D, else undecided"""
    d = g.require_regular()
    instance = PathStatsInstance.symmetric(lam, d, k, D, delta, bipartite)
    if not instance.ramanujan:
        cert = infeasibility_certificate(g, instance)
        slack = slack_for(g.n, c0)
        if cert.refutes(delta, g.n, slack, level=D) and cert.nonnegative_on_graph:
            return SymmetricDecision(lam, "infeasible", certificate=cert)
        return SymmetricDecision(lam, "undecided", certificate=cert)
    try:
        witness = null_witness(g, instance, mode=mode, c0=c0)
    except (KernelMomentFailure, RepairInfeasible) as e:
        logger.info("no symmetric witness at lambda %g: %s", lam, e)
        return SymmetricDecision(lam, "undecided", witness_log={"error": str(e)})
    report = path_stats_check(g, witness, instance, c0=c0)
    return SymmetricDecision(lam, "feasible" if report.passed else "undecided", report=report, witness_log=witness.log)


## noise robustness

@dataclass
class NoiseResidualRow(Record):
    epsilon: float
    achieved: float
    residuals: List[float]
    slopes: List[float]


def noise_residuals(lift: LiftedGraph, epsilons: Sequence[float], D: int, mode: str = "rand",
                    seed: int = 0) -> List[NoiseResidualRow]:
    """
    moment residuals of the planted partition matrix after noise, with the growth
    |r_s(eps) - r_s(0)| / (eps n) per level s
    """
    instance = PathStatsInstance.from_base(lift.base, D, 1.0, bipartite=mode.endswith("_bi"))
    p = planted_witness(lift).matrix
    n = lift.n
    targets = instance.targets() * n

    def residuals(graph) -> np.ndarray:
        return np.array([np.vdot(p, a) for a in nb_matrices(graph, D)]) - targets

    clean = residuals(lift.graph)
    rows = []
    for idx, eps in enumerate(epsilons):
        if eps == 0:
            rows.append(NoiseResidualRow(0.0, 0.0, clean.tolist(), [0.0] * (D + 1)))
            continue
        noisy = apply_noise(lift.graph, NoiseSpec(eps, mode), base=lift, seed=derive_seed(seed, idx, stream=2))
        res = residuals(noisy)
        achieved = float(parse_fraction(noisy.meta["noise"]["delta"]))
        slopes = (np.abs(res - clean) / (eps * n)).tolist()
        rows.append(NoiseResidualRow(float(eps), achieved, res.tolist(), slopes))
    return rows
