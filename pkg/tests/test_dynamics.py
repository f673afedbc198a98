from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majority_lab.dynamics import (MIXED_FIXED, MIXED_PERIODIC, UNANIMOUS_BLUE, UNANIMOUS_RED,
                                   Configuration, controlled_set, controls, default_round_cap, evolve,
                                   is_dynamo, majority_step, min_dynamo_exhaustive, random_configuration)
from majority_lab.errors import DataError, PeriodNotDetectedError, UsageError
from majority_lab.generators import gen_gnp, gen_named, gen_random_regular
from majority_lab.graph import Graph, NodeSet


@st.composite
def graph_and_config(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    blue = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return Graph.from_edges(n, edges), np.array(blue, dtype=bool)


# ------------------------------------------------------------ independent oracles

def step_oracle(g, blue):
    """Per-node loop straight from the rule."""
    out = []
    for v in range(g.n):
        nb = g.neighbors_of(v).tolist()
        b = sum(blue[u] for u in nb)
        r = len(nb) - b
        out.append(True if b > r else False if r > b else bool(blue[v]))
    return np.array(out, dtype=bool)


def controls_oracle(g, S, T):
    """Enumerate every coloring of V \\ S."""
    rest = [v for v in range(g.n) if v not in S]
    for bits in product([False, True], repeat=len(rest)):
        blue = np.zeros(g.n, dtype=bool)
        blue[list(S)] = True
        blue[rest] = bits
        nxt = step_oracle(g, blue)
        if not all(nxt[v] for v in T):
            return False
    return True


def trajectory_oracle(g, blue, cap):
    seen = [tuple(blue)]
    for _ in range(cap):
        blue = step_oracle(g, blue)
        seen.append(tuple(blue))
        if seen[-1] == seen[-2] or (len(seen) > 2 and seen[-1] == seen[-3]):
            return seen
    raise AssertionError("no period")


def dynamo_oracle(g, D):
    rest = [v for v in range(g.n) if v not in D]
    for bits in product([False, True], repeat=len(rest)):
        blue = np.zeros(g.n, dtype=bool)
        blue[list(D)] = True
        blue[rest] = bits
        if not all(trajectory_oracle(g, blue, 4 * g.n * g.n)[-1]):
            return False
    return True


# ------------------------------------------------------------ examples

def test_step_examples():
    c4 = gen_named("cycle", 4)
    assert majority_step(c4, [0, 2]).members().tolist() == [1, 3]
    # star(5): center 0 with 4 leaves; 3 blue leaves turn the center blue, leaves copy the center
    star = gen_named("star", 5)
    nxt = majority_step(star, [1, 2, 3])
    assert nxt.members().tolist() == [0]
    # isolated node never changes
    g = Graph.from_edges(3, [(0, 1)])
    assert majority_step(g, [2]).members().tolist() == [2]


def test_tie_keeps_color():
    p3 = gen_named("path", 3)
    # node 1 sees one blue and one red neighbor: keeps blue
    assert 1 in majority_step(p3, [0, 1])


def test_evolve_examples():
    c4 = gen_named("cycle", 4)
    r = evolve(c4, [0, 2])
    assert (r.period, r.consensus_time, r.outcome) == (2, 0, MIXED_PERIODIC)
    k5 = gen_named("complete", 5)
    r = evolve(k5, [0, 1])
    assert (r.period, r.consensus_time, r.outcome) == (1, 1, UNANIMOUS_RED)
    assert r.blue_counts == [2, 0, 0]
    r = evolve(k5, [])
    assert (r.consensus_time, r.outcome, r.rounds_executed) == (0, UNANIMOUS_RED, 1)
    r = evolve(gen_named("path", 4), [0, 1])
    assert r.outcome == MIXED_FIXED and r.consensus_time == 0
    r = evolve(k5, [0, 1, 2])
    assert r.outcome == UNANIMOUS_BLUE


def test_evolve_cap_errors():
    # path(5) with one blue end needs two rounds to repeat
    with pytest.raises(PeriodNotDetectedError):
        evolve(gen_named("path", 5), [0], cap=1)
    assert evolve(gen_named("path", 5), [0], cap=2).outcome == UNANIMOUS_RED
    with pytest.raises(UsageError):
        evolve(gen_named("path", 5), [0], cap=0)
    assert default_round_cap(10) == 204


def test_configuration_text(tmp_path):
    c = Configuration.from_text("0110\n")
    assert c.members().tolist() == [1, 2]
    assert c.to_text() == "0110"
    assert c.swapped().to_text() == "1001"
    path = tmp_path / "c.txt"
    path.write_text("0101\n")
    assert Configuration.read(path).blue_count == 2
    with pytest.raises(DataError):
        Configuration.from_text("01a")


def test_random_configuration():
    rng = np.random.default_rng(0)
    assert random_configuration(100, 0.0, rng).blue_count == 0
    assert random_configuration(100, 1.0, rng).blue_count == 100
    c = random_configuration(100_000, 0.3, rng)
    assert abs(c.blue_count - 30_000) < 4.5 * np.sqrt(100_000 * 0.21)
    with pytest.raises(UsageError):
        random_configuration(5, 1.2, rng)


def test_controls_examples():
    k4 = gen_named("complete", 4)
    # nodes 2 and 3 see two of three neighbours in S; node 0 sees only one
    assert controls(k4, [0, 1], [2, 3])
    assert not controls(k4, [0, 1], [0])
    assert controls(k4, [0, 1, 2], [0, 1, 2, 3])
    c6 = gen_named("cycle", 6)
    assert not controls(c6, [0], [1])
    assert controls(c6, [0, 2], [1])
    assert controlled_set(c6, [0, 1]).members().tolist() == [0, 1]


def test_dynamo_examples():
    assert is_dynamo(gen_named("complete", 5), [0, 1, 2])
    assert not is_dynamo(gen_named("complete", 5), [0, 1])
    assert not is_dynamo(gen_named("cycle", 6), [0, 2, 4])
    assert is_dynamo(gen_named("cycle", 4), [0, 1, 2])


def test_min_dynamo_golden():
    # values from the brute-force oracle in this file, frozen
    assert min_dynamo_exhaustive(gen_named("cycle", 4))[0] == 3
    assert min_dynamo_exhaustive(gen_named("complete", 4))[0] == 3
    assert min_dynamo_exhaustive(gen_named("path", 5))[0] == 3
    size, witness = min_dynamo_exhaustive(gen_named("path", 5))
    assert witness.members().tolist() == [0, 1, 3]
    with pytest.raises(UsageError):
        min_dynamo_exhaustive(gen_named("cycle", 25))


def test_min_dynamo_oracle_agreement():
    for name, n in [("cycle", 4), ("complete", 4), ("path", 5), ("star", 5), ("cycle", 5)]:
        g = gen_named(name, n)
        size, witness = min_dynamo_exhaustive(g)
        assert dynamo_oracle(g, witness.members().tolist())
        for smaller in combinations(range(n), size - 1):
            assert not dynamo_oracle(g, smaller)


# ------------------------------------------------------------ properties

@settings(max_examples=300, deadline=None)
@given(graph_and_config())
def test_step_matches_oracle(gc):
    g, blue = gc
    assert np.array_equal(majority_step(g, blue).mask, step_oracle(g, blue))


@settings(max_examples=300, deadline=None)
@given(graph_and_config())
def test_period_and_consensus_time(gc):
    g, blue = gc
    r = evolve(g, blue)
    assert r.period in (1, 2)
    seen = trajectory_oracle(g, blue, default_round_cap(g.n))
    period = 1 if seen[-1] == seen[-2] else 2
    assert r.period == period
    # first time the recurrent configuration (or 2-cycle) appears
    assert r.consensus_time == len(seen) - 1 - period
    assert r.blue_counts == [sum(c) for c in seen]
    assert (r.outcome == UNANIMOUS_RED) == (r.final_blue == 0 and r.period == 1)


@settings(max_examples=300, deadline=None)
@given(graph_and_config(), st.data())
def test_monotone(gc, data):
    g, blue = gc
    extra = np.array(data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n)), dtype=bool)
    more = blue | extra
    assert np.all(majority_step(g, blue).mask <= majority_step(g, more).mask)


@settings(max_examples=300, deadline=None)
@given(graph_and_config())
def test_color_symmetry(gc):
    g, blue = gc
    assert np.array_equal(majority_step(g, ~blue).mask, ~majority_step(g, blue).mask)


@settings(max_examples=150, deadline=None)
@given(graph_and_config(max_n=7), st.data())
def test_controls_matches_oracle(gc, data):
    g, _ = gc
    S = data.draw(st.sets(st.integers(0, g.n - 1)))
    T = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert controls(g, sorted(S), sorted(T)) == controls_oracle(g, S, T)


@settings(max_examples=100, deadline=None)
@given(graph_and_config(max_n=6), st.data())
def test_is_dynamo_matches_oracle(gc, data):
    g, _ = gc
    D = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert is_dynamo(g, sorted(D)) == dynamo_oracle(g, D)


def test_period_on_larger_random_graphs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = gen_gnp(1000, 3 / 1000, rng)
        assert evolve(g, random_configuration(g.n, 0.5, rng)).period in (1, 2)
        h = gen_random_regular(500, 3, rng)
        assert evolve(h, random_configuration(h.n, 0.5, rng)).period in (1, 2)
