import pytest

from eg_matchlab.errors import CapabilityError, InputError
from eg_matchlab.graph_core import Graph, GnpParams, gen_gnp, vset_members
from eg_matchlab.matching import (is_bipartite, is_forest, matching_number,
                                  max_matching, odd_components,
                                  tutte_berge_witness, vertex_cover_number)
from eg_matchlab.harness import trial_seed

from conftest import cycle, path_graph
from oracles import (brute_matching_number, brute_vertex_cover,
                     has_augmenting_path, random_forest, tb_max_over_subsets)


def random_graph(tag: int) -> Graph:
    n = 3 + tag % 10
    p = [0.15, 0.3, 0.5, 0.7, 0.85][tag % 5]
    return gen_gnp(GnpParams(n, p, trial_seed(0xA11CE, tag)))


class TestMaxMatching:
    def test_empty(self):
        assert matching_number(Graph(5)) == 0

    def test_k4(self, k4):
        assert matching_number(k4) == 2

    def test_petersen(self, petersen):
        assert matching_number(petersen) == 5

    def test_matching_is_valid(self, petersen):
        mm = max_matching(petersen)
        seen = 0
        for u, v in mm.pairs:
            assert petersen.has_edge(u, v)
            assert not (seen >> u & 1) and not (seen >> v & 1)
            seen |= (1 << u) | (1 << v)

    def test_against_brute_force(self):
        for tag in range(120):
            g = random_graph(tag)
            assert matching_number(g) == brute_matching_number(g), tag

    def test_no_augmenting_path(self):
        for tag in range(60):
            g = random_graph(tag)
            mm = max_matching(g)
            assert not has_augmenting_path(g, mm.pairs), tag

    def test_odd_cycles_and_blossoms(self):
        for n in range(3, 12):
            assert matching_number(cycle(n)) == n // 2
            assert matching_number(path_graph(n)) == n // 2

    def test_two_triangles_bridge(self):
        # classic blossom shape: two triangles joined by an edge
        g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
        assert matching_number(g) == 3

    @staticmethod
    def _flower(petals, petal_len):
        edges, nxt = [], 1
        for _ in range(petals):
            cyc = [0] + list(range(nxt, nxt + petal_len - 1))
            nxt += petal_len - 1
            edges += [(cyc[i], cyc[(i + 1) % len(cyc)])
                      for i in range(len(cyc))]
        return Graph(nxt, edges)

    def test_blossom_flowers(self):
        # nested odd cycles through one hub force repeated contractions
        for petals in (2, 3, 4):
            for plen in (3, 5):
                g = self._flower(petals, plen)
                assert matching_number(g) == brute_matching_number(g)
                assert not has_augmenting_path(g, max_matching(g).pairs)

    def test_odd_cycle_chains(self):
        for k, clen in [(2, 3), (2, 5), (3, 5), (2, 7)]:
            edges, base, prev = [], 0, None
            for _ in range(k):
                cyc = list(range(base, base + clen))
                edges += [(cyc[i], cyc[(i + 1) % clen]) for i in range(clen)]
                if prev is not None:
                    edges.append((prev, base))
                prev = base + clen // 2
                base += clen
            g = Graph(base, edges)
            assert matching_number(g) == brute_matching_number(g)


class TestTutteBerge:
    def test_k4(self, k4):
        w = tutte_berge_witness(k4)
        assert (w.s_set, w.odd_count, w.deficiency) == (0, 0, 0)
        assert w.exhaustive

    def test_star(self, star4):
        w = tutte_berge_witness(star4)
        assert vset_members(w.s_set) == [0]
        assert w.odd_count == 3
        assert w.deficiency == 2 == star4.n - 2 * matching_number(star4)

    def test_c5(self, c5):
        w = tutte_berge_witness(c5)
        assert w.s_set == 0 and w.odd_count == 1 and w.deficiency == 1

    def test_identity_small_graphs(self):
        for tag in range(100):
            g = random_graph(tag)
            w = tutte_berge_witness(g)
            assert w.deficiency == g.n - 2 * matching_number(g)
            # witness value really is attained
            assert odd_components(g, w.s_set) - w.s_set.bit_count() == w.deficiency

    def test_matches_direct_subset_maximum(self):
        for tag in range(40):
            g = random_graph(tag)
            if g.n > 8:
                continue
            assert tutte_berge_witness(g).deficiency == tb_max_over_subsets(g)

    def test_capability_error_above_cutoff(self):
        g = gen_gnp(GnpParams(24, 0.3, 5))
        with pytest.raises(CapabilityError):
            tutte_berge_witness(g, n_exact=20)

    def test_heuristic_mode_flagged_and_valid(self):
        g = gen_gnp(GnpParams(30, 0.2, 5))
        w = tutte_berge_witness(g, n_exact=20, allow_heuristic=True)
        assert not w.exhaustive
        assert odd_components(g, w.s_set) - w.s_set.bit_count() == w.deficiency
        # the structural witness is in fact optimal
        assert w.deficiency == g.n - 2 * matching_number(g)


class TestVertexCover:
    def test_star(self, star4):
        assert vertex_cover_number(star4) == 1

    def test_c5(self, c5):
        assert vertex_cover_number(c5) == 3

    def test_forest_tau_equals_nu(self):
        for seed in range(40):
            f = random_forest(3 + seed % 10, seed)
            assert vertex_cover_number(f) == matching_number(f)

    def test_against_brute_force(self):
        for tag in range(60):
            g = random_graph(tag)
            if g.n > 9:
                continue
            assert vertex_cover_number(g) == brute_vertex_cover(g), tag

    def test_nu_tau_sandwich(self):
        for tag in range(60):
            g = random_graph(tag)
            nu = matching_number(g)
            tau = vertex_cover_number(g)
            assert nu <= tau <= 2 * nu

    def test_konig_on_bipartite(self):
        for tag in range(60):
            g = random_graph(tag)
            if is_bipartite(g):
                assert vertex_cover_number(g) == matching_number(g)

    def test_budget_exhaustion(self):
        g = gen_gnp(GnpParams(30, 0.5, 11))
        with pytest.raises(CapabilityError) as err:
            vertex_cover_number(g, node_budget=3)
        assert err.value.upper is not None

    def test_env_budget_override(self, monkeypatch):
        monkeypatch.setenv("EG_MATCHLAB_BUDGET", "2")
        g = gen_gnp(GnpParams(30, 0.5, 11))
        with pytest.raises(CapabilityError):
            vertex_cover_number(g)

    def test_env_budget_validation(self, monkeypatch):
        monkeypatch.setenv("EG_MATCHLAB_BUDGET", "zero")
        with pytest.raises(InputError):
            vertex_cover_number(Graph(2, [(0, 1)]))


class TestForest:
    def test_path_is_forest(self):
        assert is_forest(path_graph(3))

    def test_cycle_is_not(self, c5):
        assert not is_forest(c5)

    def test_sparse_gnp_mostly_forest(self):
        hits = sum(is_forest(gen_gnp(GnpParams(1000, 0.0001, seed)))
                   for seed in range(30))
        assert hits >= 28
