import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eg_matchlab.errors import InputError
from eg_matchlab.graph_core import Graph, GnpParams, gen_gnp, vset

from conftest import complete_graph, path_graph


def small_graphs():
    """Hypothesis strategy: a graph on up to 9 vertices."""
    return st.integers(1, 9).flatmap(
        lambda n: st.builds(
            Graph,
            st.just(n),
            st.lists(
                st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                .filter(lambda e: e[0] != e[1]),
                max_size=24,
            ),
        )
    )


class TestConstruction:
    def test_dedupes_and_canonicalizes(self):
        g = Graph(3, [(1, 0), (0, 1), (2, 1)])
        assert g.edge_list() == [(0, 1), (1, 2)]
        assert g.m == 2

    def test_rejects_self_loop(self):
        with pytest.raises(InputError):
            Graph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(InputError):
            Graph(3, [(0, 3)])

    def test_edge_count_cap(self):
        g = complete_graph(6)
        assert g.m == 15 == 6 * 5 // 2

    def test_adjacency_symmetric(self):
        g = Graph(4, [(0, 2), (1, 3)])
        for u in range(4):
            for v in range(4):
                assert g.has_edge(u, v) == g.has_edge(v, u)


class TestGnp:
    def test_p_zero_empty(self):
        g = gen_gnp(GnpParams(5, 0.0, 7))
        assert g.n == 5 and g.m == 0

    def test_p_one_complete(self):
        g = gen_gnp(GnpParams(5, 1.0, 7))
        assert g.m == 10
        assert g == complete_graph(5)

    def test_reproducible(self):
        a = gen_gnp(GnpParams(64, 0.37, 123456))
        b = gen_gnp(GnpParams(64, 0.37, 123456))
        assert a == b
        assert a.edge_array().tobytes() == b.edge_array().tobytes()

    def test_seed_changes_graph(self):
        a = gen_gnp(GnpParams(64, 0.37, 1))
        b = gen_gnp(GnpParams(64, 0.37, 2))
        assert a != b

    def test_mean_edge_count_within_3_sigma(self):
        # Bin(4950, 0.3): mean 1485, per-graph variance 1039.5
        n, p, resamples = 100, 0.3, 10_000
        counts = [gen_gnp(GnpParams(n, p, seed)).m for seed in range(resamples)]
        mean = float(np.mean(counts))
        mu = p * n * (n - 1) / 2
        sigma_mean = (mu * (1 - p)) ** 0.5 / resamples ** 0.5
        assert abs(mean - mu) < 3 * sigma_mean

    def test_param_validation(self):
        with pytest.raises(InputError):
            GnpParams(0, 0.5, 1)
        with pytest.raises(InputError):
            GnpParams(5, 1.5, 1)
        with pytest.raises(InputError):
            GnpParams(5, 0.5, -1)


class TestCounting:
    def test_k4_within_all(self, k4):
        assert k4.edges_within(k4.full_mask()) == 6

    def test_singleton_within_zero(self, k4):
        for v in range(4):
            assert k4.edges_within(1 << v) == 0
        assert k4.edges_within(0) == 0

    def test_path_skip_pair(self):
        g = path_graph(3)
        assert g.edges_within(vset([0, 2])) == 0

    def test_between_k4(self, k4):
        assert k4.edges_between(vset([0, 1]), vset([2, 3])) == 4

    def test_between_empty_graph(self):
        g = Graph(6)
        assert g.edges_between(vset([0, 1]), vset([4, 5])) == 0

    def test_between_path(self):
        g = path_graph(3)
        assert g.edges_between(vset([0, 2]), vset([1])) == 2

    def test_between_rejects_overlap(self, k4):
        with pytest.raises(InputError):
            k4.edges_between(vset([0, 1]), vset([1, 2]))

    def test_within_rejects_out_of_range(self, k4):
        with pytest.raises(InputError):
            k4.edges_within(1 << 7)

    @settings(max_examples=120, deadline=None)
    @given(small_graphs(), st.integers(0, (1 << 9) - 1))
    def test_partition_identity(self, g, raw_mask):
        x = raw_mask & g.full_mask()
        rest = g.full_mask() & ~x
        total = (g.edges_within(x) + g.edges_within(rest)
                 + g.edges_between(x, rest))
        assert total == g.m


class TestComponents:
    def test_k4_whole(self, k4):
        comps = k4.components()
        assert comps == [vset([0, 1, 2, 3])]

    def test_star_minus_center(self, star4):
        comps = star4.components(removed=vset([0]))
        assert comps == [vset([1]), vset([2]), vset([3])]
        assert all(c.bit_count() % 2 == 1 for c in comps)

    def test_c5_minus_vertex(self, c5):
        comps = c5.components(removed=vset([0]))
        assert len(comps) == 1
        assert comps[0].bit_count() == 4

    def test_order_by_smallest_member(self):
        g = Graph(6, [(4, 5), (0, 1)])
        comps = g.components()
        mins = [(c & -c).bit_length() - 1 for c in comps]
        assert mins == sorted(mins)

    @settings(max_examples=80, deadline=None)
    @given(small_graphs(), st.integers(0, (1 << 9) - 1))
    def test_sizes_sum(self, g, raw_mask):
        removed = raw_mask & g.full_mask()
        comps = g.components(removed)
        assert sum(c.bit_count() for c in comps) == g.n - removed.bit_count()


class TestSerialization:
    def test_round_trip(self, petersen):
        text = petersen.to_edge_list_text()
        again = Graph.from_edge_list_text(text)
        assert again == petersen
        header = text.splitlines()[0]
        assert header == "10 15"

    def test_bad_header(self):
        with pytest.raises(InputError):
            Graph.from_edge_list_text("5")

    def test_wrong_edge_count(self):
        with pytest.raises(InputError):
            Graph.from_edge_list_text("3 2\n0 1\n")

    def test_bad_token(self):
        with pytest.raises(InputError):
            Graph.from_edge_list_text("3 1\n0 x\n")


class TestBigN:
    def test_pair_index_inversion_at_scale(self):
        from eg_matchlab.graph_core import _pairs_from_indices
        n = 10 ** 6
        total = n * (n - 1) // 2
        rng = np.random.default_rng(5)
        idx = np.sort(rng.integers(0, total, size=20_000, dtype=np.int64))
        idx = np.concatenate([[0, 1, n - 2, n - 1], idx,
                              [total - 2, total - 1]])
        pairs = _pairs_from_indices(n, idx)
        u, v = pairs[:, 0], pairs[:, 1]
        back = u * (n - 1) - u * (u - 1) // 2 + (v - u - 1)
        assert (back == idx).all()
        assert (0 <= u).all() and (u < v).all() and (v < n).all()

    def test_tiny_p_generation(self):
        g = gen_gnp(GnpParams(1000, 1e-9, 3))
        assert g.m == 0
        g = gen_gnp(GnpParams(2, 0.5, 3))
        assert g.m in (0, 1)

    def test_list_fallback_matches_bitset(self):
        edges = [(0, 1), (1, 2), (2, 3), (70000, 70001), (3, 70000)]
        big = Graph(70002, edges)            # above the bitset limit
        assert not big.has_bitset_adjacency()
        small = Graph(6, [(0, 1), (1, 2), (2, 3), (4, 5), (3, 4)])
        mask_small = vset([0, 1, 2, 3])
        mask_big = vset([0, 1, 2, 3])
        assert big.edges_within(mask_big) == small.edges_within(mask_small) == 3
        comps = big.components()
        assert sum(c.bit_count() for c in comps) == big.n
        assert big.degree(70000) == 2
