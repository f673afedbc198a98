import math

import networkx as nx
import numpy as np
import pytest

from majority_lab.errors import GenerationError, ParameterError, UsageError
from majority_lab.generators import (GenSpec, four_square_generators, gen_gnp, gen_lps_ramanujan,
                                     gen_named, gen_random_regular, is_prime, is_quadratic_residue,
                                     parse_named)
from majority_lab.graph import validate


def test_gnp_extremes():
    rng = np.random.default_rng(0)
    assert gen_gnp(50, 0.0, rng).m == 0
    assert gen_gnp(50, 1.0, rng).m == 50 * 49 // 2
    with pytest.raises(ParameterError):
        gen_gnp(10, 1.5, rng)


def test_gnp_mean_edge_count():
    # E[m] = C(2000,2) * 0.01 = 19990, sd of the mean over 200 graphs = sqrt(19990*0.99/200)
    n, p, reps = 2000, 0.01, 200
    counts = [gen_gnp(n, p, np.random.default_rng(s)).m for s in range(reps)]
    mean = n * (n - 1) / 2 * p
    sd = math.sqrt(mean * (1 - p) / reps)
    assert abs(np.mean(counts) - mean) < 3 * sd
    # variance check against the binomial: ratio within a generous band
    assert 0.7 < np.var(counts, ddof=1) / (mean * (1 - p)) < 1.3


def test_gnp_pairs_uniform():
    # every pair of a small graph appears with frequency ~p
    n, p, reps = 8, 0.3, 4000
    hits = np.zeros((n, n))
    rng = np.random.default_rng(11)
    for _ in range(reps):
        for u, v in gen_gnp(n, p, rng).edges().tolist():
            hits[u, v] += 1
    freq = hits[np.triu_indices(n, 1)] / reps
    sd = math.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(freq - p) < 4.5 * sd)


def test_gnp_deterministic():
    a = gen_gnp(500, 0.02, np.random.default_rng(9))
    b = gen_gnp(500, 0.02, np.random.default_rng(9))
    assert a == b


def test_regular_small_is_k4():
    g = gen_random_regular(4, 3, np.random.default_rng(0))
    assert g == gen_named("complete", 4)


@pytest.mark.parametrize("method,delta,seeds", [("switch", 10, 50), ("restart", 3, 20), ("auto", 4, 20)])
def test_regular_structure(method, delta, seeds):
    for seed in range(seeds):
        g = gen_random_regular(1000, delta, np.random.default_rng(seed), method=method)
        assert g.regular_degree() == delta
        assert validate(g) == []


def test_regular_parameter_errors():
    with pytest.raises(ParameterError):
        gen_random_regular(5, 3, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        gen_random_regular(4, 4, np.random.default_rng(0))


def test_regular_restart_cap():
    # dense pairing almost never simple on the first draw
    with pytest.raises(GenerationError):
        gen_random_regular(60, 30, np.random.default_rng(0), method="restart", restart_cap=2)


def test_regular_restart_uniform_on_small_space():
    # 3-regular graphs on 6 nodes: 70 labelled graphs (K_{3,3} copies and prisms)
    seen = {}
    rng = np.random.default_rng(2)
    for _ in range(7000):
        key = tuple(map(tuple, gen_random_regular(6, 3, rng, method="restart").edges().tolist()))
        seen[key] = seen.get(key, 0) + 1
    assert len(seen) == 70
    counts = np.array(list(seen.values()))
    assert counts.min() > 60 and counts.max() < 145


def test_number_theory_helpers():
    assert [x for x in range(30) if is_prime(x)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_quadratic_residue(17, 13)
    assert not is_quadratic_residue(13, 5)
    assert len(four_square_generators(5)) == 6
    assert len(four_square_generators(17)) == 18
    for a in four_square_generators(13):
        assert sum(x * x for x in a) == 13 and a[0] > 0 and a[0] % 2 == 1


@pytest.mark.parametrize("p,q", [(13, 5), (5, 7), (4, 13), (5, 5)])
def test_lps_rejects_bad_parameters(p, q):
    with pytest.raises(UsageError):
        gen_lps_ramanujan(p, q)


def test_lps_small_structure():
    # p=13, q=17: 13 is a QR mod 17 (8^2 = 64 = 13 mod 17); PSL(2,17) has 17*288/2 nodes
    g = gen_lps_ramanujan(13, 17)
    assert g.n == 17 * (17 ** 2 - 1) // 2
    assert g.regular_degree() == 14
    assert g.is_connected()
    assert validate(g) == []


def test_lps_matches_networkx_is_vertex_transitive_degree():
    g = gen_lps_ramanujan(17, 13)
    h = nx.Graph(g.edges().tolist())
    assert nx.is_connected(h)
    assert h.number_of_nodes() == 1092
    assert set(dict(h.degree()).values()) == {18}


def test_named_graphs_against_networkx():
    cases = {
        "petersen": nx.petersen_graph(),
        "cycle(7)": nx.cycle_graph(7),
        "path(5)": nx.path_graph(5),
        "complete(6)": nx.complete_graph(6),
        "complete_bipartite(3,4)": nx.complete_bipartite_graph(3, 4),
        "star(9)": nx.star_graph(8),
    }
    for text, ref in cases.items():
        g = gen_named(text)
        h = nx.Graph(g.edges().tolist())
        h.add_nodes_from(range(g.n))
        assert nx.is_isomorphic(h, ref), text


def test_named_parsing_and_errors():
    assert parse_named("complete_bipartite(4, 4)") == ("complete_bipartite", (4, 4))
    assert parse_named("petersen") == ("petersen", ())
    with pytest.raises(UsageError):
        gen_named("hypercube", 3)


def test_genspec_build_and_validation():
    g = GenSpec(kind="regular", n=100, delta=4).build(np.random.default_rng(0))
    assert g.regular_degree() == 4
    assert GenSpec(kind="gnp", n=10, p=0.5).is_random
    assert GenSpec(kind="gnp", n=10, p=0.5).param == 0.5
    with pytest.raises(UsageError):
        GenSpec(kind="torus", n=10)
    with pytest.raises(UsageError):
        GenSpec(kind="gnp", n=10)


def test_regular_switch_reaches_every_graph_on_small_space():
    # switch repair is only approximately uniform; require full support and a loose band
    seen = {}
    rng = np.random.default_rng(2)
    for _ in range(7000):
        key = tuple(map(tuple, gen_random_regular(6, 3, rng, method="switch").edges().tolist()))
        seen[key] = seen.get(key, 0) + 1
    counts = np.array(list(seen.values()))
    assert len(seen) == 70
    assert counts.min() > 40 and counts.max() < 180
