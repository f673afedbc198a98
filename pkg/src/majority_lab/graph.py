"""Immutable simple undirected graphs in flattened (CSR) adjacency form.

Edge counting between node sets always uses ordered pairs: an edge with both
endpoints in S and T is counted twice, once per orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DataError, UsageError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class NodeSet:
    """Subset of the node range 0..n-1, stored as a boolean membership mask."""

    __slots__ = ("_mask", "_card")

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 1:
            raise UsageError("node-set mask must be one-dimensional")
        self._mask = _frozen(mask.copy())
        self._card = int(np.count_nonzero(mask))

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]):
        mask = np.zeros(n, dtype=bool)
        idx = np.fromiter((int(v) for v in members), dtype=np.int64)
        if idx.size:
            if idx.min() < 0 or idx.max() >= n:
                raise UsageError(f"node id out of range for n={n}")
            mask[idx] = True
        return cls(mask)

    @classmethod
    def empty(cls, n: int):
        return cls(np.zeros(n, dtype=bool))

    @classmethod
    def full(cls, n: int):
        return cls(np.ones(n, dtype=bool))

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def n(self) -> int:
        return self._mask.size

    @property
    def cardinality(self) -> int:
        return self._card

    def members(self) -> np.ndarray:
        return np.flatnonzero(self._mask)

    def complement(self):
        return type(self)(~self._mask)

    def issubset(self, other: "NodeSet") -> bool:
        return not np.any(self._mask & ~other.mask)

    def __len__(self):
        return self._card

    def __iter__(self):
        return iter(int(v) for v in self.members())

    def __contains__(self, v) -> bool:
        return 0 <= v < self.n and bool(self._mask[v])

    def __eq__(self, other):
        if not isinstance(other, NodeSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._mask, other.mask)

    def __hash__(self):
        return hash((self.n, np.packbits(self._mask).tobytes()))

    def __or__(self, other):
        return type(self)(self._mask | other.mask)

    def __and__(self, other):
        return type(self)(self._mask & other.mask)

    def __sub__(self, other):
        return type(self)(self._mask & ~other.mask)

    def __repr__(self):
        shown = self.members()[:12].tolist()
        tail = ", ..." if self._card > 12 else ""
        return f"{type(self).__name__}(n={self.n}, members={shown}{tail})"


def as_mask(g_or_n, s) -> np.ndarray:
    """Coerce a NodeSet, boolean mask or iterable of ids into a boolean mask."""
    n = g_or_n if isinstance(g_or_n, (int, np.integer)) else g_or_n.n
    if isinstance(s, NodeSet):
        mask = s.mask
    elif isinstance(s, np.ndarray) and s.dtype == bool:
        mask = s
    elif isinstance(s, (list, tuple)) and s and all(isinstance(x, (bool, np.bool_)) for x in s):
        mask = np.asarray(s, dtype=bool)
    else:
        return NodeSet.from_members(n, s).mask
    if mask.shape != (n,):
        raise UsageError(f"node set has length {mask.shape[0]}, graph has n={n}")
    return mask


@dataclass(frozen=True, eq=False)
class Graph:
    """Adjacency in CSR form: neighbors of v are ``neighbors[offsets[v]:offsets[v+1]]``.

    The raw constructor performs no checks so that ``validate`` can report on
    malformed data; use :meth:`from_edges` to build a checked graph.
    """

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offsets", _frozen(np.asarray(self.offsets, dtype=np.int64)))
        object.__setattr__(self, "neighbors", _frozen(np.asarray(self.neighbors, dtype=np.int64)))
        if self.offsets.shape != (self.n + 1,):
            raise DataError("offsets must have length n + 1")
        if self.offsets[0] != 0 or self.offsets[-1] != self.neighbors.size:
            raise DataError("offsets do not span the neighbor array")

    @classmethod
    def from_edges(cls, n: int, edges, check: bool = True) -> "Graph":
        """Build from an iterable or (m, 2) array of undirected edges.

        Rejects self-loops, duplicate edges (in either orientation) and ids outside 0..n-1.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2) if len(edges) else np.empty((0, 2), np.int64)
        if check and e.size:
            if e.min() < 0 or e.max() >= n:
                raise DataError(f"edge endpoint out of range for n={n}")
            if np.any(e[:, 0] == e[:, 1]):
                bad = e[e[:, 0] == e[:, 1]][0]
                raise DataError(f"self-loop at node {bad[0]}")
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            keys = np.unique(lo * n + hi)
            if keys.size != e.shape[0]:
                raise DataError("duplicate edge")
        return cls.from_arcs(n, np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))

    @classmethod
    def from_arcs(cls, n: int, src: np.ndarray, dst: np.ndarray) -> "Graph":
        order = np.argsort(src * max(n, 1) + dst, kind="stable")
        src, dst = src[order], dst[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(n, offsets, dst)

    @classmethod
    def from_adjacency_lists(cls, adj) -> "Graph":
        """Build without checks from a list of per-node neighbor lists (order preserved)."""
        n = len(adj)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum([len(a) for a in adj], out=offsets[1:])
        flat = np.fromiter((u for a in adj for u in a), dtype=np.int64, count=int(offsets[-1]))
        return cls(n, offsets, flat)

    @property
    def m(self) -> int:
        return self.neighbors.size // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.offsets))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse 0/1 adjacency matrix (int32 entries, exact integer matvec)."""
        data = np.ones(self.neighbors.size, dtype=np.int32)
        return sp.csr_matrix((data, self.neighbors, self.offsets), shape=(self.n, self.n))

    def neighbors_of(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.neighbors
        return np.column_stack([src[keep], self.neighbors[keep]])

    def regular_degree(self):
        """Common degree if every node has the same degree, else None."""
        if self.n == 0:
            return 0
        d = self.degrees
        return int(d[0]) if np.all(d == d[0]) else None

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def _check_node(self, v):
        if not 0 <= v < self.n:
            raise UsageError(f"node id {v} out of range 0..{self.n - 1}")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors))

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def degree(g: Graph, v: int) -> int:
    g._check_node(v)
    return int(g.offsets[v + 1] - g.offsets[v])


def edge_count_between(g: Graph, S, T) -> int:
    """|{(v, u): v in S, u in T, {v, u} in E}| counted over ordered pairs."""
    s = as_mask(g, S)
    t = as_mask(g, T)
    if not s.any() or not t.any():
        return 0
    return int(g.adjacency.dot(t.astype(np.int64))[s].sum())


def validate(g: Graph) -> list[str]:
    """List every invariant violation; an empty list means the graph is valid."""
    problems = []
    n = g.n
    nb = g.neighbors
    if nb.size and (nb.min() < 0 or nb.max() >= n):
        problems.append("neighbor id out of range")
        return problems
    deg = np.diff(g.offsets)
    if np.any(deg < 0):
        problems.append("offsets not non-decreasing")
        return problems
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    for v in np.unique(src[src == nb]):
        problems.append(f"self-loop at node {v}")
    # positions where the next entry belongs to the same list
    same = src[1:] == src[:-1]
    dup = same & (nb[1:] == nb[:-1])
    for i in np.flatnonzero(dup):
        problems.append(f"duplicate edge ({src[i]}, {nb[i]})")
    unsorted = same & (nb[1:] < nb[:-1])
    for v in np.unique(src[1:][unsorted]):
        problems.append(f"neighbor list of node {v} not sorted")
    fwd = np.unique(src * n + nb)
    rev = nb * n + src
    missing = ~np.isin(rev, fwd)
    for u, v in zip(src[missing].tolist(), nb[missing].tolist()):
        problems.append(f"asymmetric adjacency: ({u}, {v}) present but ({v}, {u}) absent")
    if nb.size % 2:
        problems.append("sum of degrees is odd")
    return problems


def save_edgelist(g: Graph, path) -> None:
    e = g.edges()
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in e.tolist():
            fh.write(f"{u} {v}\n")


def load_edgelist(path) -> Graph:
    """Read the ``n m`` header + ``u v`` lines format; '#' lines are comments."""
    rows = []
    header = None
    with open(Path(path)) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer token in {line!r}") from None
            if header is None:
                header = (a, b)
            else:
                if a >= b:
                    if a == b:
                        raise DataError(f"{path}:{lineno}: self-loop ({a}, {b})")
                    raise DataError(f"{path}:{lineno}: edge must be written with u < v")
                rows.append((a, b))
    if header is None:
        raise DataError(f"{path}: missing 'n m' header")
    n, m = header
    if n < 0 or m < 0:
        raise DataError(f"{path}: negative header values")
    if len(rows) != m:
        raise DataError(f"{path}: header declares {m} edges, found {len(rows)}")
    return Graph.from_edges(n, np.array(rows, dtype=np.int64).reshape(-1, 2))
