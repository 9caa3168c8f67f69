## TITLE: liftbench spectral certificates
## CC: okzyrox
## LICENSE: MIT

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np

from .graph_core import Multigraph, find_bipartition
from .serial import Record
from .spectral import graph_spectrum

logger = logging.getLogger(__name__)


class Quantity(enum.Enum):
    MAX_T_CUT = "max_t_cut"
    CHROMATIC = "chromatic"
    INDEPENDENCE = "independence"
    MODIFIED_INDEPENDENCE = "modified_independence"
    DOMINATION = "domination"
    VERTEX_EXPANSION = "vertex_expansion"
    EDGE_EXPANSION = "edge_expansion"

    def __str__(self):
        return self.value


class Direction(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    def __str__(self):
        return self.value


def quantity_from_name(name: str) -> Quantity:
    match name.lower().replace("-", "_"):
        case "max_t_cut" | "maxcut" | "max_cut" | "cut": return Quantity.MAX_T_CUT
        case "chromatic" | "colouring" | "coloring": return Quantity.CHROMATIC
        case "independence" | "ind": return Quantity.INDEPENDENCE
        case "modified_independence": return Quantity.MODIFIED_INDEPENDENCE
        case "domination" | "dom": return Quantity.DOMINATION
        case "vertex_expansion" | "vertex": return Quantity.VERTEX_EXPANSION
        case "edge_expansion" | "edge": return Quantity.EDGE_EXPANSION
        case _: raise ValueError(f"Unknown quantity {name!r}")


@dataclass
class CertificateResult(Record):
    quantity: Quantity
    bound: float
    direction: Direction
    inputs: Dict[str, Any] = field(default_factory=dict)
    exact: Optional[Fraction] = None
    correction: Optional[str] = None

    def admits(self, value) -> bool:
        """True when value is on the allowed side of the bound"""
        tol = 1e-9
        if self.direction is Direction.UPPER:
            return float(value) <= self.bound + tol
        return float(value) >= self.bound - tol


def smallest_eigenvalue(g: Multigraph, bipartite: bool = False) -> float:
    """
    lambda_n of the adjacency. bipartite=True drops the trivial -d first; for
    disconnected input the raw minimum is used
    """
    if not g.is_connected():
        return float(np.linalg.eigvalsh(g.mult.astype(float))[0])
    if bipartite and find_bipartition(g) is None:
        bipartite = False
    spectrum = graph_spectrum(g, bipartite=bipartite)
    return float(spectrum.values[-1]) if not bipartite else float(spectrum.nontrivial[-1])


def second_eigenvalue(g: Multigraph) -> float:
    return float(graph_spectrum(g).nontrivial[0])


def _spectral_inputs(g: Optional[Multigraph], d: Optional[int], lambda_n: Optional[float], bipartite: bool):
    if g is not None:
        d = g.require_regular() if d is None else d
        if lambda_n is None:
            lambda_n = smallest_eigenvalue(g, bipartite=bipartite)
    if d is None or lambda_n is None:
        raise ValueError("Need a graph or both d and lambda_n")
    return int(d), float(lambda_n)


def hoffman_max_t_cut(g: Optional[Multigraph] = None, t: int = 2, *, d: Optional[int] = None,
                      lambda_n: Optional[float] = None, bipartite: bool = False) -> CertificateResult:
    if t < 2:
        raise ValueError(f"t must be at least 2, got {t}")
    d, lambda_n = _spectral_inputs(g, d, lambda_n, bipartite)
    bound = (t - 1) / t * (1.0 + abs(lambda_n) / d)
    return CertificateResult(Quantity.MAX_T_CUT, bound, Direction.UPPER,
                             {"d": d, "lambda_n": lambda_n, "t": t, "deflated": bipartite})


def hoffman_chromatic(g: Optional[Multigraph] = None, *, d: Optional[int] = None,
                      lambda_n: Optional[float] = None, bipartite: bool = False) -> CertificateResult:
    d, lambda_n = _spectral_inputs(g, d, lambda_n, bipartite)
    if lambda_n == 0:
        raise ValueError("lambda_n = 0 gives no chromatic bound")
    ## ceil with a little slack so d / |lambda_n| = 3 + 1e-15 still reads as 3
    bound = 1 + math.ceil(d / abs(lambda_n) - 1e-9)
    return CertificateResult(Quantity.CHROMATIC, float(bound), Direction.LOWER,
                             {"d": d, "lambda_n": lambda_n, "deflated": bipartite}, exact=Fraction(bound))


def hoffman_independence(g: Optional[Multigraph] = None, *, d: Optional[int] = None,
                         lambda_n: Optional[float] = None, bipartite: bool = False) -> CertificateResult:
    d, lambda_n = _spectral_inputs(g, d, lambda_n, bipartite)
    bound = abs(lambda_n) / (d + abs(lambda_n))
    return CertificateResult(Quantity.INDEPENDENCE, bound, Direction.UPPER,
                             {"d": d, "lambda_n": lambda_n, "deflated": bipartite})


def trivial_domination(d: int) -> CertificateResult:
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    value = Fraction(1, d + 1)
    return CertificateResult(Quantity.DOMINATION, float(value), Direction.LOWER, {"d": d}, exact=value)


def kahale_bound(g: Optional[Multigraph] = None, epsilon: float = 0.01, mode: str = "vertex", *,
                 d: Optional[int] = None, lambda_2: Optional[float] = None) -> CertificateResult:
    """
    leading term of the small-set expansion bounds with lambda_tilde = max(lambda_2, 2 sqrt(d-1)).
    the (1 - C log d / log(1/eps)) factor is carried symbolically, C is not known
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if g is not None:
        d = g.require_regular() if d is None else d
        if lambda_2 is None:
            lambda_2 = second_eigenvalue(g)
    if d is None or lambda_2 is None:
        raise ValueError("Need a graph or both d and lambda_2")
    ramanujan_edge = 2.0 * math.sqrt(d - 1)
    lam = max(float(lambda_2), ramanujan_edge)
    if mode == "vertex":
        inner = max(0.0, 1.0 - 4.0 * (d - 1) / (lam * lam))
        bound = (d / 2.0) * (1.0 - math.sqrt(inner))
        quantity = Quantity.VERTEX_EXPANSION
    elif mode == "edge":
        inner = max(0.0, lam * lam / 4.0 - (d - 1))
        bound = d - (1.0 + lam / 2.0 + math.sqrt(inner))
        quantity = Quantity.EDGE_EXPANSION
    else:
        raise ValueError(f"Unknown expansion mode {mode!r}, expected 'vertex' or 'edge'")
    ratio = math.log(d) / math.log(1.0 / epsilon)
    return CertificateResult(quantity, bound, Direction.LOWER,
                             {"d": d, "lambda_2": lambda_2, "lambda_tilde": lam, "epsilon": epsilon,
                              "log_d_over_log_inv_eps": ratio},
                             correction="(1 - C * log(d) / log(1/eps)), C unspecified")


def certify(quantity, g: Optional[Multigraph] = None, *, t: int = 2, epsilon: float = 0.01,
            d: Optional[int] = None, bipartite: bool = False) -> CertificateResult:
    quantity = quantity if isinstance(quantity, Quantity) else quantity_from_name(quantity)
    logger.debug("certify %s on %s", quantity, g)
    match quantity:
        case Quantity.MAX_T_CUT: return hoffman_max_t_cut(g, t, d=d, bipartite=bipartite)
        case Quantity.CHROMATIC: return hoffman_chromatic(g, d=d, bipartite=bipartite)
        case Quantity.INDEPENDENCE | Quantity.MODIFIED_INDEPENDENCE:
            return hoffman_independence(g, d=d, bipartite=bipartite)
        case Quantity.DOMINATION:
            return trivial_domination(g.require_regular() if d is None else d)
        case Quantity.VERTEX_EXPANSION: return kahale_bound(g, epsilon, "vertex", d=d)
        case Quantity.EDGE_EXPANSION: return kahale_bound(g, epsilon, "edge", d=d)
