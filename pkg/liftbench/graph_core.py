## TITLE: liftbench graph carriers
## CC: okzyrox
## LICENSE: MIT

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .errors import (
    DisconnectedInput,
    NotRegular,
    NotSymmetric,
    SizeMismatch,
    UnbalancedBipartition,
)
from .serial import decode_matrix, encode_matrix, matrix_digest

logger = logging.getLogger(__name__)


class Multigraph:
    """
    symmetric integer multiplicity matrix. off diagonal entries count parallel edges,
    the diagonal counts loops and every loop adds 1 to the degree
    """

    def __init__(self, mult, name: Optional[str] = None):
        mult = np.array(mult, dtype=np.int64)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1]:
            raise ValueError(f"Multiplicity matrix must be square, got shape {mult.shape}")
        if not np.array_equal(mult, mult.T):
            raise NotSymmetric("Multiplicity matrix is not symmetric")
        if mult.size and mult.min() < 0:
            raise ValueError(f"Multiplicities must be nonnegative, found {mult.min()}")
        mult.setflags(write=False)
        self._mult = mult
        self.name = name

    @property
    def mult(self) -> np.ndarray:
        return self._mult

    @property
    def n(self) -> int:
        return self._mult.shape[0]

    @property
    def loops(self) -> np.ndarray:
        return np.diag(self._mult)

    def degrees(self) -> np.ndarray:
        return self._mult.sum(axis=1)

    def regular_degree(self) -> Optional[int]:
        degs = self.degrees()
        if len(degs) == 0 or not np.all(degs == degs[0]):
            return None
        return int(degs[0])

    def require_regular(self) -> int:
        d = self.regular_degree()
        if d is None:
            raise NotRegular(f"Graph is not regular, degrees range over {sorted(set(self.degrees().tolist()))}")
        return d

    def has_loops(self) -> bool:
        return bool(np.any(self.loops > 0))

    def is_simple(self) -> bool:
        return not self.has_loops() and bool(np.all(self._mult <= 1))

    def edge_weight_total(self) -> Fraction:
        ## |E| with loops counted as half an edge, i.e. sum of degrees / 2
        return Fraction(int(self.degrees().sum()), 2)

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.n))
        iu, ju = np.nonzero(np.triu(self._mult))
        for i, j in zip(iu.tolist(), ju.tolist()):
            for _ in range(int(self._mult[i, j])):
                graph.add_edge(i, j)
        return graph

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        return nx.is_connected(nx.from_numpy_array((self._mult > 0).astype(int)))

    def adjacency_lists(self) -> List[List[int]]:
        ## neighbours with multiplicity, loops listed once per loop
        out = []
        for i in range(self.n):
            row = []
            for j in np.nonzero(self._mult[i])[0].tolist():
                row.extend([j] * int(self._mult[i, j]))
            out.append(row)
        return out

    def loops_removed(self) -> "Multigraph":
        mult = self._mult.copy()
        np.fill_diagonal(mult, 0)
        return Multigraph(mult)

    def digest(self) -> str:
        return matrix_digest(self._mult)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "mult": self._mult.tolist()}

    def __eq__(self, other):
        return isinstance(other, Multigraph) and np.array_equal(self._mult, other._mult)

    def __hash__(self):
        return hash(self._mult.tobytes())

    def __str__(self):
        label = self.name or self.__class__.__name__
        d = self.regular_degree()
        return f"{label}(n = {self.n}, d = {d if d is not None else 'irregular'})"

    def __repr__(self):
        return str(self)


class SimpleGraph(Multigraph):
    """0/1 symmetric adjacency, no loops. meta carries provenance (noise logs etc)"""

    def __init__(self, adjacency, name: Optional[str] = None, meta: Optional[Dict[str, Any]] = None):
        super().__init__(adjacency, name=name)
        if self.has_loops():
            raise ValueError("Simple graph cannot have loops")
        if self._mult.size and self._mult.max() > 1:
            raise ValueError("Simple graph cannot have parallel edges")
        self.meta: Dict[str, Any] = dict(meta or {})

    @property
    def adjacency(self) -> np.ndarray:
        return self._mult

    @classmethod
    def from_edges(cls, n: int, edges, **kwargs) -> "SimpleGraph":
        adjacency = np.zeros((n, n), dtype=np.int64)
        for u, v in edges:
            if u == v:
                raise ValueError(f"Loop at vertex {u} in simple graph edge list")
            if adjacency[u, v]:
                raise ValueError(f"Repeated edge ({u}, {v}) in simple graph edge list")
            adjacency[u, v] = adjacency[v, u] = 1
        return cls(adjacency, **kwargs)

    def edges(self) -> List[Tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self._mult, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def edge_set(self) -> set:
        return set(self.edges())

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}


@dataclass(frozen=True)
class BipartiteLayout:
    left: Tuple[int, ...]
    right: Tuple[int, ...]
    ## permutation[new_position] = old vertex, left side first
    permutation: Tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.left) + len(self.right)

    def side_of(self) -> np.ndarray:
        side = np.zeros(self.n, dtype=np.int64)
        side[list(self.right)] = 1
        return side

    def sign_vector(self) -> np.ndarray:
        ## +1 on the left, -1 on the right, in original vertex order
        return 1 - 2 * self.side_of()

    def signed_projector(self) -> np.ndarray:
        ## the [[J, -J], [-J, J]] block matrix in original vertex order
        s = self.sign_vector().astype(float)
        return np.outer(s, s)

    def to_dict(self) -> Dict[str, Any]:
        return {"left": list(self.left), "right": list(self.right)}


def degree_profile(g: Multigraph) -> List[int]:
    return [int(x) for x in g.degrees()]


def find_bipartition(g: Multigraph) -> Optional[BipartiteLayout]:
    """
    balanced 2-colouring of a connected graph, None if an odd cycle exists.
    the side holding vertex 0 is reported as the left side
    """
    if not g.is_connected():
        raise DisconnectedInput("find_bipartition needs a connected graph")
    if g.has_loops():
        return None
    graph = nx.from_numpy_array((g.mult > 0).astype(int))
    if not nx.is_bipartite(graph):
        return None
    colouring = nx.bipartite.color(graph)
    zero_colour = colouring[0]
    left = tuple(sorted(v for v, c in colouring.items() if c == zero_colour))
    right = tuple(sorted(v for v, c in colouring.items() if c != zero_colour))
    if len(left) != len(right):
        raise UnbalancedBipartition(f"Bipartition sides have sizes {len(left)} and {len(right)}")
    return BipartiteLayout(left=left, right=right, permutation=left + right)


def graph_distance(g1: SimpleGraph, g2: SimpleGraph) -> Fraction:
    if g1.n != g2.n:
        raise SizeMismatch(f"Graphs have {g1.n} and {g2.n} vertices")
    d1, d2 = g1.regular_degree(), g2.regular_degree()
    if d1 is None or d2 is None or d1 != d2:
        raise NotRegular(f"Graph distance needs two d-regular graphs of equal degree, got {d1} and {d2}")
    diff = int(np.abs(g1.mult - g2.mult).sum()) // 2
    return Fraction(diff, 2 * g1.n)


def double_cover(h: Multigraph) -> Multigraph:
    h.require_regular()
    k = h.n
    mult = np.zeros((2 * k, 2 * k), dtype=np.int64)
    mult[:k, k:] = h.mult
    mult[k:, :k] = h.mult
    name = f"double_cover({h.name})" if h.name else None
    return Multigraph(mult, name=name)


def relabel(g: Multigraph, perm) -> Multigraph:
    ## vertex perm[i] of g becomes vertex i of the output
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise ValueError(f"Not a permutation of range({g.n})")
    mult = g.mult[np.ix_(perm, perm)]
    if isinstance(g, SimpleGraph):
        return SimpleGraph(mult, name=g.name, meta=g.meta)
    return Multigraph(mult, name=g.name)


def as_simple(g: Multigraph) -> SimpleGraph:
    if isinstance(g, SimpleGraph):
        return g
    return SimpleGraph(g.mult, name=g.name)


## built-in families

def complete_graph(d: int) -> Multigraph:
    if d < 1:
        raise ValueError(f"Degree must be at least 1, got {d}")
    k = d + 1
    return SimpleGraph(np.ones((k, k), dtype=np.int64) - np.eye(k, dtype=np.int64), name=f"complete_{d}")


def hkd(k: int, d: int) -> Multigraph:
    ## (d/(k-1)) (J - I)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if d % (k - 1):
        raise ValueError(f"k - 1 = {k - 1} must divide d = {d}")
    b = d // (k - 1)
    return Multigraph(b * (np.ones((k, k), dtype=np.int64) - np.eye(k, dtype=np.int64)), name=f"hkd({k},{d})")


def uniform_complete(k: int, a: int, b: int) -> Multigraph:
    ## a loops per vertex, b parallel edges per pair: (a - b) I + b J
    if k < 1 or a < 0 or b < 0:
        raise ValueError(f"Need k >= 1 and a, b >= 0, got k={k}, a={a}, b={b}")
    mult = (a - b) * np.eye(k, dtype=np.int64) + b * np.ones((k, k), dtype=np.int64)
    return Multigraph(mult, name=f"uniform_complete({k},{a},{b})")


def prism(k: int) -> SimpleGraph:
    ## circular ladder C_k x K_2, vertices i and k + i are the rungs
    if k < 3:
        raise ValueError(f"Prism needs k >= 3, got {k}")
    edges = []
    for i in range(k):
        edges.append((i, (i + 1) % k))
        edges.append((k + i, k + (i + 1) % k))
        edges.append((i, k + i))
    return SimpleGraph.from_edges(2 * k, edges, name=f"prism({k})")


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"cycle_{n}")


## files

def save_graph(g: Multigraph, filename: str, format: str = "json"):
    ## formats: 'json', 'csv', 'bin'
    if format == "json":
        with open(filename, "w") as f:
            json.dump(g.to_dict(), f)
    elif format == "csv":
        with open(filename, "w", newline="") as f:
            writer = csv.writer(f)
            for row in g.mult.tolist():
                writer.writerow(row)
    elif format == "bin" or format == "binary":
        with open(filename, "wb") as f:
            f.write(encode_matrix(g.mult))
    else:
        raise ValueError(f"Unsupported format: {format}")


def graph_from_dict(data: Dict[str, Any], name: Optional[str] = None) -> Multigraph:
    n = int(data["n"])
    if "mult" in data:
        mult = np.array(data["mult"], dtype=np.int64)
        if mult.shape != (n, n):
            raise SizeMismatch(f"Declared n = {n} but matrix has shape {mult.shape}")
        g = Multigraph(mult, name=name)
        if g.is_simple():
            return SimpleGraph(mult, name=name)
        return g
    if "edges" in data:
        return SimpleGraph.from_edges(n, [tuple(e) for e in data["edges"]], name=name)
    raise ValueError("Graph JSON needs either 'mult' or 'edges'")


def _from_matrix(mult, name):
    g = Multigraph(mult, name=name)
    return SimpleGraph(mult, name=name) if g.is_simple() else g


def load_graph(filename: str) -> Multigraph:
    name, ext = os.path.splitext(filename)
    name = os.path.basename(name)
    if ext == ".json":
        with open(filename, "r") as f:
            return graph_from_dict(json.load(f), name=name)
    elif ext == ".csv":
        with open(filename, "r", newline="") as f:
            rows = [[int(x) for x in row] for row in csv.reader(f) if row]
        return _from_matrix(np.array(rows, dtype=np.int64), name)
    elif ext == ".bin":
        with open(filename, "rb") as f:
            return _from_matrix(decode_matrix(f.read()), name)
    elif ext == ".txt":
        return _from_matrix(np.loadtxt(filename, dtype=np.int64, comments="#", ndmin=2), name)
    else:
        raise ValueError(f"Invalid graph format to load from: {ext}")
