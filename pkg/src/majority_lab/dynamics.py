"""Synchronous majority model: step kernel, trajectories, controls and dynamos.

Each round every node takes the strict majority color of its neighbors (its
own color is not counted) and keeps its color on a tie. Isolated nodes always
tie and so never change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import DataError, PeriodNotDetectedError, UsageError
from .graph import Graph, NodeSet, as_mask

UNANIMOUS_RED = "unanimous_red"
UNANIMOUS_BLUE = "unanimous_blue"
MIXED_FIXED = "mixed_fixed"
MIXED_PERIODIC = "mixed_periodic"
OUTCOMES = (UNANIMOUS_RED, UNANIMOUS_BLUE, MIXED_FIXED, MIXED_PERIODIC)

EXHAUSTIVE_DYNAMO_LIMIT = 24


class Configuration(NodeSet):
    """Two-coloring of the nodes, stored as its blue set (True = blue)."""

    __slots__ = ()

    @classmethod
    def from_text(cls, text: str):
        s = text.strip()
        if s and set(s) - {"0", "1"}:
            raise DataError("configuration text must contain only '0' and '1'")
        return cls(np.frombuffer(s.encode(), dtype=np.uint8) == ord("1"))

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        if len(lines) != 1:
            raise DataError(f"{path}: configuration must be a single line of 0/1 characters")
        return cls.from_text(lines[0])

    def to_text(self) -> str:
        return (self.mask.astype(np.uint8) + ord("0")).tobytes().decode()

    @property
    def blue_count(self) -> int:
        return self.cardinality

    def swapped(self) -> "Configuration":
        return type(self)(~self.mask)


def default_round_cap(n: int) -> int:
    return 2 * n * n + 4


def random_configuration(n: int, p_b: float, rng: np.random.Generator) -> Configuration:
    """Each node blue independently with probability p_b."""
    if not 0.0 <= p_b <= 1.0:
        raise UsageError(f"p_b={p_b} outside [0, 1]")
    return Configuration(rng.random(n) < p_b)


def _step_mask(g: Graph, blue: np.ndarray) -> np.ndarray:
    twice = 2 * (g.adjacency @ blue.astype(np.int32))
    deg = g.degrees
    return (twice > deg) | ((twice == deg) & blue)


def majority_step(g: Graph, c) -> Configuration:
    """One synchronous round; returns a fresh configuration."""
    blue = as_mask(g, c)
    return Configuration(_step_mask(g, blue))


@dataclass
class TrajectoryReport:
    blue_counts: list
    period: int
    consensus_time: int
    outcome: str
    rounds_executed: int
    n: int
    final: Optional[Configuration] = field(default=None, repr=False)

    @property
    def final_blue(self) -> int:
        return self.blue_counts[-1]

    def to_dict(self, trace: bool = False) -> dict:
        d = {
            "n": self.n,
            "period": self.period,
            "consensus_time": self.consensus_time,
            "outcome": self.outcome,
            "rounds_executed": self.rounds_executed,
            "initial_blue": self.blue_counts[0],
            "final_blue": self.final_blue,
        }
        if trace:
            d["blue_counts"] = list(self.blue_counts)
        return d


def _classify(period: int, blue: int, n: int) -> str:
    if period == 2:
        return MIXED_PERIODIC
    if blue == 0:
        return UNANIMOUS_RED
    if blue == n:
        return UNANIMOUS_BLUE
    return MIXED_FIXED


def evolve(g: Graph, c0, cap: Optional[int] = None) -> TrajectoryReport:
    """Iterate the majority step until a configuration repeats with period 1 or 2.

    ``consensus_time`` is the first round at which the recurrent configuration
    (or 2-cycle) is entered. Only the last two configurations are kept.
    """
    cur = as_mask(g, c0)
    n = g.n
    cap = default_round_cap(n) if cap is None else cap
    if cap < 1:
        raise UsageError("round cap must be >= 1")
    counts = [int(np.count_nonzero(cur))]
    older = None
    for t in range(1, cap + 1):
        nxt = _step_mask(g, cur)
        counts.append(int(np.count_nonzero(nxt)))
        if np.array_equal(nxt, cur):
            period, ct = 1, t - 1
        elif older is not None and np.array_equal(nxt, older):
            period, ct = 2, t - 2
        else:
            older, cur = cur, nxt
            continue
        return TrajectoryReport(blue_counts=counts, period=period, consensus_time=ct,
                                outcome=_classify(period, counts[-1], n), rounds_executed=t,
                                n=n, final=Configuration(nxt))
    raise PeriodNotDetectedError(f"no period <= 2 detected within {cap} rounds on n={n}")


# --------------------------------------------------------------- controls

def controlled_set(g: Graph, S) -> NodeSet:
    """The largest set that S controls.

    v outside S is forced blue iff more than half its neighbors are in S; v in
    S stays blue iff at least half are (ties keep color, so isolated members count).
    """
    s = as_mask(g, S)
    twice = 2 * (g.adjacency @ s.astype(np.int32))
    deg = g.degrees
    return NodeSet(np.where(s, twice >= deg, twice > deg))


def controls(g: Graph, S, T) -> bool:
    """True iff S fully blue forces T fully blue next round, whatever the other colors."""
    t = as_mask(g, T)
    return not np.any(t & ~controlled_set(g, S).mask)


def is_dynamo(g: Graph, D, cap: Optional[int] = None) -> bool:
    """True iff D blue forces eventual all-blue for every coloring of the rest.

    The majority step is monotone in the blue set, so the all-red coloring of
    V \\ D is the worst case and a single trajectory decides.
    """
    return evolve(g, as_mask(g, D), cap=cap).outcome == UNANIMOUS_BLUE


def min_dynamo_exhaustive(g: Graph, limit: int = EXHAUSTIVE_DYNAMO_LIMIT):
    """Smallest dynamo by size-ascending enumeration; ties go to the lexicographically first set.

    Returns ``(size, NodeSet)``.
    """
    n = g.n
    if n > limit:
        raise UsageError(f"exhaustive dynamo search refused for n={n} > {limit}; "
                         "use sampled is_dynamo audits instead")
    for k in range(0, n + 1):
        for combo in combinations(range(n), k):
            mask = np.zeros(n, dtype=bool)
            mask[list(combo)] = True
            if is_dynamo(g, mask):
                return k, NodeSet(mask)
    raise AssertionError("V itself is always a dynamo")
