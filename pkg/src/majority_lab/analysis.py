"""Round-bound checks along trajectories, plus immunity and short-cycle audits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .dynamics import UNANIMOUS_RED, TrajectoryReport
from .errors import PreconditionError, UsageError
from .graph import Graph
from .spectral import random_subsets

EXHAUSTIVE_IMMUNITY_LIMIT = 20
BOUND_RTOL = 1e-9


def seed_threshold(n: int, delta: int, lam: float) -> float:
    """(1/2 - 2 lam/delta) n: below this many blue nodes the next round has at most n/4."""
    return (0.5 - 2.0 * lam / delta) * n


def contraction_factor(delta: int, lam: float) -> float:
    """16 lam^2 / delta^2, the per-round shrink factor once at most n/4 nodes are blue."""
    return 16.0 * lam * lam / (delta * delta)


def theorem2_round_cap(n: int, delta: int, lam: float) -> int:
    """2 + ceil(log(n/4) / log(delta^2 / (16 lam^2))).

    One round to fall to n/4 blue nodes, then geometric decay below one node.
    Requires a contraction factor below 1.
    """
    factor = contraction_factor(delta, lam)
    if factor >= 1:
        raise PreconditionError(f"contraction >= 1 (16 lam^2/delta^2 = {factor:.4g})", reason="contraction")
    if lam == 0:
        return 2
    return 2 + max(0, math.ceil(math.log(n / 4) / math.log(1.0 / factor)))


@dataclass
class RoundCheck:
    t: int
    blue: int
    next_blue: int
    cap: float
    quarter_premise: bool
    quarter_holds: bool
    contraction_premise: bool
    contraction_holds: bool


@dataclass
class BoundCheckReport:
    n: int
    delta: int
    lambda_: float
    threshold_seed: float
    contraction_factor: float
    predicted_caps: list
    actual: list
    rounds: list = field(repr=False)
    theorem2_round_cap: Optional[int] = None
    all_bounds_hold: bool = True

    @property
    def premises_fired(self) -> dict:
        return {"quarter": sum(r.quarter_premise for r in self.rounds),
                "contraction": sum(r.contraction_premise for r in self.rounds)}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["premises_fired"] = self.premises_fired
        return d


def bound_trajectory(g: Graph, lam: float, traj: TrajectoryReport, rtol: float = BOUND_RTOL) -> BoundCheckReport:
    """Check the two one-round bounds on every consecutive pair of a trajectory.

    If |B(t)| <= (1/2 - 2 lam/delta) n then |B(t+1)| <= n/4; if |B(t)| <= n/4 then
    |B(t+1)| <= 16 (lam/delta)^2 |B(t)|. A bound whose premise fails is vacuous.
    """
    delta = g.regular_degree()
    if delta is None or delta == 0:
        raise PreconditionError("bound checks need a regular graph of positive degree", reason="non-regular")
    if traj.n != g.n:
        raise UsageError("trajectory was not produced on this graph")
    n = g.n
    thr = seed_threshold(n, delta, lam)
    fac = contraction_factor(delta, lam)
    slack = rtol * max(1, n)
    counts = list(traj.blue_counts)
    rounds = []
    caps = []
    ok = True
    for t in range(len(counts) - 1):
        b, nb = counts[t], counts[t + 1]
        cap = float(n)
        p1 = thr >= 0 and b <= thr
        h1 = True
        if p1:
            cap = min(cap, n / 4)
            h1 = nb <= n / 4 + slack
        p2 = b <= n / 4
        h2 = True
        if p2:
            cap = min(cap, fac * b)
            h2 = nb <= fac * b + slack
        ok &= h1 and h2
        caps.append(cap)
        rounds.append(RoundCheck(t, b, nb, cap, p1, h1, p2, h2))
    try:
        t2 = theorem2_round_cap(n, delta, lam)
    except PreconditionError:
        t2 = None
    return BoundCheckReport(n=n, delta=delta, lambda_=float(lam), threshold_seed=thr, contraction_factor=fac,
                            predicted_caps=caps, actual=counts[1:], rounds=rounds,
                            theorem2_round_cap=t2, all_bounds_hold=bool(ok))


def check_theorem2(g: Graph, lam: float, traj: TrajectoryReport) -> bool:
    """Whether the trajectory reaches all-red within :func:`theorem2_round_cap` rounds.

    Raises PreconditionError with ``reason`` "contraction" or "threshold" when
    the round bound does not apply.
    """
    delta = g.regular_degree()
    if delta is None or delta == 0:
        raise PreconditionError("the round-cap check needs a regular graph", reason="non-regular")
    cap = theorem2_round_cap(g.n, delta, lam)
    thr = seed_threshold(g.n, delta, lam)
    if traj.blue_counts[0] > thr:
        raise PreconditionError(f"|B(0)| = {traj.blue_counts[0]} exceeds (1/2 - 2 lam/delta) n = {thr:.2f}",
                                reason="threshold")
    return traj.outcome == UNANIMOUS_RED and traj.consensus_time <= cap


# ------------------------------------------------------------------ immunity

@dataclass
class ImmunityReport:
    beta: float
    mode: str
    samples: int
    worst_ratio: float
    worst_witness: list
    max_size: int
    size_classes: list
    delta: Optional[int] = None
    lambda_: Optional[float] = None
    lemma_checked: int = 0
    lemma_violations: int = 0
    worst_lemma_excess: float = -math.inf
    alpha_claim: Optional[float] = None

    @property
    def claim_holds(self) -> Optional[bool]:
        """worst_ratio <= 32/delta (the Ramanujan immunity constant), if delta is known."""
        if self.alpha_claim is None:
            return None
        return self.worst_ratio <= self.alpha_claim

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["claim_holds"] = self.claim_holds
        if not math.isfinite(d["worst_lemma_excess"]):
            d["worst_lemma_excess"] = None
        return d


def immunity_constants(delta: int) -> tuple[float, float]:
    """(alpha, beta) = (32/delta, 1/4): sets of size <= n/4 control at most 32 s/delta nodes."""
    return 32.0 / delta, 0.25


class _Tracker:
    def __init__(self, g, lam):
        self.g = g
        self.a = g.adjacency
        self.deg = g.degrees
        self.delta = g.regular_degree()
        self.fac = contraction_factor(self.delta, lam) if (lam is not None and self.delta) else None
        self.worst = -1.0
        self.witness = []
        self.checked = 0
        self.violations = 0
        self.excess = -math.inf
        self.count = 0

    def feed(self, masks: np.ndarray):
        # masks: (b, n) boolean, one candidate S per row
        twice = 2 * (self.a @ masks.T.astype(np.int32))
        deg = self.deg[:, None]
        ctrl = np.where(masks.T, twice >= deg, twice > deg)
        csize = ctrl.sum(axis=0)
        ssize = masks.sum(axis=1)
        ratio = csize / ssize
        i = int(np.argmax(ratio))
        if ratio[i] > self.worst:
            self.worst = float(ratio[i])
            self.witness = np.flatnonzero(masks[i]).tolist()
        self.count += len(ssize)
        if self.fac is not None:
            prem = ssize <= self.g.n / 4
            excess = csize - self.fac * ssize
            self.checked += int(prem.sum())
            self.violations += int(np.sum(prem & (excess > BOUND_RTOL * self.g.n)))
            if prem.any():
                self.excess = max(self.excess, float(excess[prem].max()))


def immunity_audit(g: Graph, beta: float, mode: str = "sampled", budget: int = 1000,
                   rng: Optional[np.random.Generator] = None, lam: Optional[float] = None,
                   batch: int = 512) -> ImmunityReport:
    """Largest |controlled_set(S)| / |S| over sets with 1 <= |S| <= beta n.

    ``exhaustive`` enumerates every such set (n <= 20). ``sampled`` draws
    ``budget`` uniform sets in each of the size classes 1 and
    ceil(beta n / 10) * k for k = 1..10 (capped at beta n). When ``lam`` is
    given on a regular graph, every set of size <= n/4 is also checked against
    |controlled_set(S)| <= 16 (lam/delta)^2 |S|.
    """
    if not 0 < beta <= 1:
        raise UsageError(f"beta={beta} must lie in (0, 1]")
    n = g.n
    max_size = int(math.floor(beta * n + 1e-9))
    tr = _Tracker(g, lam)
    if mode == "exhaustive":
        if n > EXHAUSTIVE_IMMUNITY_LIMIT:
            raise UsageError(f"exhaustive immunity audit refused for n={n} > {EXHAUSTIVE_IMMUNITY_LIMIT}")
        classes = list(range(1, max_size + 1))
        for s in classes:
            buf = []
            for combo in combinations(range(n), s):
                row = np.zeros(n, dtype=bool)
                row[list(combo)] = True
                buf.append(row)
                if len(buf) == batch:
                    tr.feed(np.array(buf))
                    buf = []
            if buf:
                tr.feed(np.array(buf))
    elif mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        step = math.ceil(beta * n / 10)
        classes = sorted({1} | {min(step * k, max_size) for k in range(1, 11)}) if max_size >= 1 else []
        for s in classes:
            left = budget
            while left > 0:
                b = min(batch, left)
                tr.feed(random_subsets(n, np.full(b, s), rng))
                left -= b
    else:
        raise UsageError(f"unknown immunity mode {mode!r}")
    delta = g.regular_degree()
    return ImmunityReport(
        beta=beta, mode=mode, samples=tr.count, worst_ratio=max(tr.worst, 0.0), worst_witness=tr.witness,
        max_size=max_size, size_classes=classes, delta=delta, lambda_=lam,
        lemma_checked=tr.checked, lemma_violations=tr.violations, worst_lemma_excess=tr.excess,
        alpha_claim=immunity_constants(delta)[0] if delta else None)


# ------------------------------------------------------------------ short cycles

def _edge(u, v):
    return (u, v) if u < v else (v, u)


def short_cycles(g: Graph) -> set:
    """All cycles of length 3 and 4, each as a frozenset of its edges (u, v), u < v.

    Cycles are told apart by edge set, so K4 has 4 triangles and 3 squares.
    """
    adj = [set(g.neighbors_of(v).tolist()) for v in range(g.n)]
    found = set()
    for u in range(g.n):
        for w in adj[u]:
            if w <= u:
                continue
            for x in adj[u] & adj[w]:
                if x > w:
                    found.add(frozenset((_edge(u, w), _edge(w, x), _edge(u, x))))
    # two distinct length-2 paths a-x-b and a-y-b close the square a-x-b-y
    centers = {}
    for x in range(g.n):
        nb = sorted(adj[x])
        for i, a in enumerate(nb):
            for b in nb[i + 1:]:
                centers.setdefault((a, b), []).append(x)
    for (a, b), xs in centers.items():
        for x, y in combinations(xs, 2):
            found.add(frozenset((_edge(a, x), _edge(x, b), _edge(b, y), _edge(a, y))))
    return found


def short_cycle_nodes(g: Graph) -> list:
    """Nodes lying on at least two distinct cycles of length 3 or 4.

    Cycles are compared by node set. Two squares on the same four nodes force
    K4, whose triangles flag those nodes anyway, so comparing by edge set
    would flag exactly the same nodes.
    """
    hits = np.zeros(g.n, dtype=np.int64)
    for nodes in {frozenset(v for e in cyc for v in e) for cyc in short_cycles(g)}:
        for v in nodes:
            hits[v] += 1
    return np.flatnonzero(hits >= 2).tolist()


def short_cycle_audit(g: Graph) -> int:
    return len(short_cycle_nodes(g))
