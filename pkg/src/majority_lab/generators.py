"""Graph families: G(n,p), random regular, LPS Ramanujan Cayley graphs, named fixtures."""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstructionError, GenerationError, ParameterError, UsageError
from .graph import Graph, load_edgelist, validate

DEFAULT_RESTART_CAP = 10_000


@dataclass
class GenSpec:
    """Declarative description of a graph to build.

    ``kind`` is one of gnp, regular, lps, named, file. Only the fields relevant
    to the kind are read.
    """

    kind: str
    n: Optional[int] = None
    p: Optional[float] = None
    delta: Optional[int] = None
    lps_p: Optional[int] = None
    lps_q: Optional[int] = None
    name: Optional[str] = None
    params: tuple = field(default_factory=tuple)
    path: Optional[str] = None
    seed: int = 0

    KINDS = ("gnp", "regular", "lps", "named", "file")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise UsageError(f"unknown graph kind {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "gnp":
            if self.n is None or self.p is None:
                raise UsageError("gnp needs n and p")
            if not 0.0 <= self.p <= 1.0:
                raise ParameterError(f"edge probability p={self.p} outside [0, 1]")
        elif self.kind == "regular":
            if self.n is None or self.delta is None:
                raise UsageError("regular needs n and delta")
            _check_regular_params(self.n, self.delta)
        elif self.kind == "lps":
            if self.lps_p is None or self.lps_q is None:
                raise UsageError("lps needs lps_p and lps_q")
            check_lps_params(self.lps_p, self.lps_q)
        elif self.kind == "named":
            if not self.name:
                raise UsageError("named graph needs a name")
        elif self.kind == "file" and not self.path:
            raise UsageError("file graph needs a path")

    @property
    def is_random(self) -> bool:
        return self.kind in ("gnp", "regular")

    @property
    def param(self):
        """The family parameter reported in trial records (p for gnp, delta for regular)."""
        return {"gnp": self.p, "regular": self.delta, "lps": self.lps_p}.get(self.kind)

    def build(self, rng: Optional[np.random.Generator] = None) -> Graph:
        if rng is None:
            rng = np.random.default_rng(self.seed)
        if self.kind == "gnp":
            return gen_gnp(self.n, self.p, rng)
        if self.kind == "regular":
            return gen_random_regular(self.n, self.delta, rng)
        if self.kind == "lps":
            return gen_lps_ramanujan(self.lps_p, self.lps_q)
        if self.kind == "named":
            return gen_named(self.name, *self.params)
        return load_edgelist(self.path)


# --------------------------------------------------------------------- G(n,p)

def _slot_to_pair(n: int, k: np.ndarray):
    # slot index over pairs (u, v), u < v, in row-major upper-triangular order
    u_idx = np.arange(n, dtype=np.int64)
    starts = u_idx * (2 * n - u_idx - 1) // 2
    u = np.searchsorted(starts, k, side="right") - 1
    v = k - starts[u] + u + 1
    return u, v


def gen_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdős–Rényi G(n,p) by geometric skipping over the C(n,2) edge slots.

    Cost is O(n + m) rather than O(n^2).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability p={p} outside [0, 1]")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph.from_edges(n, np.empty((0, 2), dtype=np.int64), check=False)
    chunks = []
    pos = -1
    batch = int(total * p * 1.05) + 64
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
        batch = max(64, batch // 4)
    slots = np.concatenate(chunks)
    u, v = _slot_to_pair(n, slots)
    return Graph.from_edges(n, np.column_stack([u, v]), check=False)


# ------------------------------------------------------------- random regular

def _check_regular_params(n: int, delta: int):
    if n <= 0 or delta < 0:
        raise ParameterError("need n > 0 and delta >= 0")
    if delta >= n:
        raise ParameterError(f"degree {delta} must be < n={n}")
    if (n * delta) % 2:
        raise ParameterError(f"n*delta = {n * delta} is odd")


def _pairing(n: int, delta: int, rng: np.random.Generator) -> np.ndarray:
    stubs = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), delta))
    return stubs.reshape(-1, 2)


def _is_simple(n: int, pairs: np.ndarray) -> bool:
    a, b = pairs[:, 0], pairs[:, 1]
    if np.any(a == b):
        return False
    keys = np.minimum(a, b) * n + np.maximum(a, b)
    return np.unique(keys).size == keys.size


def _switch_repair(n: int, pairs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Remove loops and multi-edges from a pairing by degree-preserving switches.

    Each defective pair (a, b) is exchanged against a uniformly chosen good
    edge (c, d) for the two edges (a, c), (b, d), provided neither is a loop or
    already present.
    """
    a, b = pairs[:, 0], pairs[:, 1]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keys = lo * n + hi
    _, first = np.unique(keys, return_index=True)
    good = np.zeros(len(keys), dtype=bool)
    good[first] = True
    good &= a != b
    edges_a = a[good].tolist()
    edges_b = b[good].tolist()
    present = set(keys[good].tolist())
    bad = list(zip(a[~good].tolist(), b[~good].tolist()))
    pool = []
    tries = min(100_000, 50 * len(edges_a) + 1000)
    for x, y in bad:
        for _ in range(tries):
            if not pool:
                pool = rng.random(4096).tolist()
            r = pool.pop()
            k = int(r * len(edges_a))
            c, d = edges_a[k], edges_b[k]
            if r * len(edges_a) - k < 0.5:
                c, d = d, c
            if x == c or y == d:
                continue
            k1 = min(x, c) * n + max(x, c)
            k2 = min(y, d) * n + max(y, d)
            if k1 == k2 or k1 in present or k2 in present:
                continue
            present.discard(min(c, d) * n + max(c, d))
            present.add(k1)
            present.add(k2)
            edges_a[k], edges_b[k] = x, c
            edges_a.append(y)
            edges_b.append(d)
            break
        else:
            raise GenerationError("switch repair found no admissible partner edge")
    return np.column_stack([edges_a, edges_b])


def gen_random_regular(n: int, delta: int, rng: np.random.Generator,
                       method: str = "auto", restart_cap: int = DEFAULT_RESTART_CAP) -> Graph:
    """Random delta-regular simple graph from the pairing (configuration) model.

    ``method="restart"`` redraws the whole pairing until it is simple, which is
    exactly uniform but needs about exp((delta^2 - 1)/4) attempts.
    ``method="switch"`` repairs loops and multi-edges of a single pairing by
    switches and is approximately uniform. ``"auto"`` restarts for delta <= 4.
    """
    _check_regular_params(n, delta)
    if method == "auto":
        method = "restart" if delta <= 4 else "switch"
    if delta == 0:
        return Graph.from_edges(n, np.empty((0, 2), dtype=np.int64), check=False)
    if method == "restart":
        for _ in range(restart_cap):
            pairs = _pairing(n, delta, rng)
            if _is_simple(n, pairs):
                return Graph.from_edges(n, pairs, check=False)
        raise GenerationError(
            f"pairing model produced no simple {delta}-regular graph on {n} nodes "
            f"in {restart_cap} restarts")
    if method == "switch":
        # a stuck repair (only plausible on tiny graphs) redraws the pairing
        for _ in range(restart_cap):
            try:
                edges = _switch_repair(n, _pairing(n, delta, rng), rng)
            except GenerationError:
                continue
            return Graph.from_edges(n, edges)
        raise GenerationError(f"switch repair failed {restart_cap} times for delta={delta}, n={n}")
    raise UsageError(f"unknown random-regular method {method!r}")


# ------------------------------------------------------------------ LPS graphs

def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    f = 3
    while f * f <= x:
        if x % f == 0:
            return False
        f += 2
    return True


def is_quadratic_residue(a: int, q: int) -> bool:
    """Euler's criterion for an odd prime q; a must be nonzero mod q."""
    return pow(a % q, (q - 1) // 2, q) == 1


def check_lps_params(p: int, q: int):
    if not (is_prime(p) and is_prime(q)):
        raise ParameterError(f"p={p} and q={q} must both be prime")
    if p == q:
        raise ParameterError("p and q must be distinct")
    if p % 4 != 1 or q % 4 != 1:
        raise ParameterError(f"need p = q = 1 (mod 4), got p={p}, q={q}")
    if not is_quadratic_residue(p, q):
        raise ParameterError(f"p={p} is not a quadratic residue mod q={q}")


def four_square_generators(p: int) -> list[tuple[int, int, int, int]]:
    """Integer solutions of a0^2+a1^2+a2^2+a3^2 = p with a0 > 0 odd and a1, a2, a3 even."""
    r = math.isqrt(p)
    evens = [x for x in range(-r, r + 1) if x % 2 == 0]
    out = []
    for a0 in range(1, r + 1, 2):
        for a1 in evens:
            for a2 in evens:
                rest = p - a0 * a0 - a1 * a1 - a2 * a2
                if rest < 0:
                    continue
                a3 = math.isqrt(rest)
                if a3 * a3 != rest or a3 % 2:
                    continue
                out.append((a0, a1, a2, a3))
                if a3:
                    out.append((a0, a1, a2, -a3))
    return sorted(out)


def _sqrt_minus_one(q: int) -> int:
    for x in range(2, q):
        if x * x % q == q - 1:
            return x
    raise ParameterError(f"-1 is not a square mod {q}")


def _canonical(m, q):
    # first nonzero entry scaled to 1
    for x in m:
        if x:
            inv = pow(x, -1, q)
            return tuple(y * inv % q for y in m)
    raise ConstructionError("zero matrix in projective group")


def _matmul(x, y, q):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % q, (a * f + b * h) % q, (c * e + d * g) % q, (c * f + d * h) % q)


def lps_generator_matrices(p: int, q: int) -> list[tuple[int, int, int, int]]:
    i = _sqrt_minus_one(q)
    mats = []
    for a0, a1, a2, a3 in four_square_generators(p):
        m = ((a0 + i * a1) % q, (a2 + i * a3) % q, (-a2 + i * a3) % q, (a0 - i * a1) % q)
        mats.append(_canonical(m, q))
    return mats


def gen_lps_ramanujan(p: int, q: int) -> Graph:
    """LPS (p+1)-regular Cayley graph on PSL(2, q), q(q^2-1)/2 nodes.

    Nodes are numbered in breadth-first order from the identity; neighbors of
    g are g*s for the p+1 quaternion generators s, taken up to scalars.
    """
    check_lps_params(p, q)
    gens = four_square_generators(p)
    if len(gens) != p + 1:
        raise ConstructionError(f"expected {p + 1} four-square generators for p={p}, found {len(gens)}")
    mats = lps_generator_matrices(p, q)
    identity = (1, 0, 0, 1)
    index = {identity: 0}
    order = [identity]
    src, dst = [], []
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        gi = index[g]
        for s in mats:
            h = _canonical(_matmul(g, s, q), q)
            hi = index.get(h)
            if hi is None:
                hi = len(order)
                index[h] = hi
                order.append(h)
                queue.append(h)
            src.append(gi)
            dst.append(hi)
    expected = q * (q * q - 1) // 2
    if len(order) != expected:
        raise ConstructionError(f"closure has {len(order)} elements, expected |PSL(2,{q})| = {expected}")
    g = Graph.from_arcs(len(order), np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))
    problems = validate(g)
    if problems:
        raise ConstructionError(f"LPS graph X({p},{q}) is not simple: {problems[:3]}")
    if g.regular_degree() != p + 1:
        raise ConstructionError(f"LPS graph X({p},{q}) is not {p + 1}-regular")
    return g


# ------------------------------------------------------------------ named graphs

def _cycle(n):
    if n < 3:
        raise UsageError("cycle needs n >= 3")
    return [(i, (i + 1) % n) for i in range(n)]


def _path(n):
    if n < 1:
        raise UsageError("path needs n >= 1")
    return [(i, i + 1) for i in range(n - 1)]


def _complete(n):
    if n < 1:
        raise UsageError("complete needs n >= 1")
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _complete_bipartite(a, b):
    if a < 1 or b < 1:
        raise UsageError("complete_bipartite needs a, b >= 1")
    return [(i, a + j) for i in range(a) for j in range(b)]


def _star(n):
    # n nodes in total: center 0, leaves 1..n-1
    if n < 1:
        raise UsageError("star needs n >= 1")
    return [(0, i) for i in range(1, n)]


def _petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return outer + spokes + inner


_NAMED = {
    "cycle": (1, _cycle, lambda n: n),
    "path": (1, _path, lambda n: n),
    "complete": (1, _complete, lambda n: n),
    "complete_bipartite": (2, _complete_bipartite, lambda a, b: a + b),
    "star": (1, _star, lambda n: n),
    "petersen": (0, _petersen, lambda: 10),
}

_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_named(text: str) -> tuple[str, tuple]:
    """Split ``"complete_bipartite(4,4)"`` into ``("complete_bipartite", (4, 4))``."""
    m = _CALL_RE.match(text)
    if not m:
        raise UsageError(f"cannot parse named graph {text!r}")
    name, args = m.group(1), m.group(2)
    params = ()
    if args and args.strip():
        try:
            params = tuple(int(a) for a in args.split(","))
        except ValueError:
            raise UsageError(f"non-integer parameter in {text!r}") from None
    return name, params


def gen_named(name: str, *params) -> Graph:
    if "(" in name:
        name, parsed = parse_named(name)
        params = parsed + tuple(params)
    if name not in _NAMED:
        raise UsageError(f"unknown named graph {name!r}; known: {sorted(_NAMED)}")
    arity, build, size = _NAMED[name]
    if len(params) != arity:
        raise UsageError(f"{name} takes {arity} parameter(s), got {len(params)}")
    params = tuple(int(x) for x in params)
    edges = build(*params)
    return Graph.from_edges(size(*params), np.array(edges, dtype=np.int64).reshape(-1, 2))
