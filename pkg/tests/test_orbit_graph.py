from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cplifs import systems
from cplifs.errors import BudgetExceeded
from cplifs.ifs_core import SimilarityMap, generated_self_similar
from cplifs.markov import associated_matrix, grow_diagram, pressure_from_matrix
from cplifs.orbit_graph import (build_orbit_graph, esc_min_distance, exact_overlap_search, orbit_matrix,
                                orbit_to_dot, overlap_search_system, periodic_critical_orbit_check,
                                verify_orbit_edges)
from cplifs.weighted import spectral_radius


def sims(pairs):
    return [SimilarityMap(Fr(r), Fr(t)) for r, t in pairs]


HALVES = sims([("1/2", "0"), ("1/2", "1/2"), ("1/2", "1/4")])


class TestOrbitGraph:
    def test_cantor_edges(self, cantor):
        G = build_orbit_graph(cantor, depth=3)
        assert G.edge_set() == {("0", "0", (1, 1)), ("1", "1", (2, 1)),
                                ("1/3-", "1", (1, 1)), ("2/3+", "0", (2, 1))}

    def test_full_interval_edges(self, full):
        G = build_orbit_graph(full, depth=2)
        assert G.edge_set() == {("0", "0", (1, 1)), ("1", "1", (2, 1)),
                                ("1/2-", "1", (1, 1)), ("1/2+", "0", (2, 1))}

    def test_radius_cantor_and_full(self, cantor, full):
        for s in (0.3, 1.0):
            assert spectral_radius(orbit_matrix(build_orbit_graph(cantor)).materialize(s)) == pytest.approx(3 ** -s)
            assert spectral_radius(orbit_matrix(build_orbit_graph(full)).materialize(s)) == pytest.approx(2 ** -s)

    def test_broken_zero_carries_both_germs(self, broken):
        G = build_orbit_graph(broken, depth=4)
        zero = G.index_of(0)
        assert sorted(G.nodes[i].side for i in zero) == ["+", "-"]
        s = 0.5
        expected = (2 / 5) ** s + (1 / 5) ** s + 2 * (1 / 3) ** s
        assert spectral_radius(orbit_matrix(G).materialize(s)) == pytest.approx(expected, rel=1e-10)

    def test_isolated_start_points(self):
        # the orbit of -1/5+ leaves the first-level union at once
        G = build_orbit_graph(systems.broken_zero(), depth=1)
        i = G.index_of(Fr(-1, 5))[0]
        assert not [e for e in G.edges if e.src == i]

    def test_depth_must_be_positive(self, cantor):
        with pytest.raises(ValueError):
            build_orbit_graph(cantor, depth=0)

    @pytest.mark.parametrize("name", sorted(systems.REFERENCE_SYSTEMS))
    def test_edges_reverify(self, name):
        G = build_orbit_graph(systems.REFERENCE_SYSTEMS[name](), depth=6)
        assert verify_orbit_edges(G) == []

    def test_dot_side_tags(self, cantor):
        dot = orbit_to_dot(build_orbit_graph(cantor, depth=2))
        assert 'label="1/3-"' in dot and 'label="2/3+"' in dot


class TestOverlaps:
    def test_halves_depth_two(self):
        rep = exact_overlap_search(HALVES, 2)
        pairs = {(p.word_i, p.word_j) for p in rep.pairs if p.depth == 2}
        assert ((1, 2), (3, 1)) in pairs
        assert all(p.translation_gap == 0 and p.verdict == "exact" for p in rep.pairs)

    def test_halves_float_mode(self):
        S = [SimilarityMap(float(s.slope), float(s.translation)) for s in HALVES]
        rep = exact_overlap_search(S, 2)
        assert ((1, 2), (3, 1)) in {(p.word_i, p.word_j) for p in rep.pairs}

    def test_broken_generated_system(self, broken):
        rep = overlap_search_system(broken, 2)
        assert rep.first_overlap_depth == 2
        assert ((1, 2), (2, 1)) in {(p.word_i, p.word_j) for p in rep.pairs}

    def test_cantor_none(self, cantor):
        rep = overlap_search_system(cantor, 6)
        assert not rep.has_overlap

    def test_suspected_float_coincidence(self):
        S = [SimilarityMap(0.5, 0.0), SimilarityMap(0.5, 0.5), SimilarityMap(0.5, 0.25 + 1e-12)]
        rep = exact_overlap_search(S, 2)
        assert rep.pairs and {p.verdict for p in rep.pairs} == {"suspected"}

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            exact_overlap_search(HALVES, 20, budget=10**6)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from(["1/2", "1/3", "-1/2"]), st.sampled_from(["0", "1/2", "1/4", "1/3"])),
                    min_size=2, max_size=3), st.integers(1, 3))
    def test_overlaps_propagate(self, pairs, letter):
        S = sims(pairs)
        letter = min(letter, len(S))
        rep = exact_overlap_search(S, 3)
        for p in [p for p in rep.pairs if p.depth <= 2][:5]:
            longer = exact_overlap_search(S, p.depth + 1)
            classes = {}
            for q in longer.pairs:
                if q.depth == p.depth + 1:
                    classes.setdefault(q.word_i, set()).update({q.word_i, q.word_j})
            a, b = p.word_i + (letter,), p.word_j + (letter,)
            assert any(a in c and b in c for c in classes.values())

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from(["1/2", "1/3", "2/3"]), st.sampled_from(["0", "1/2", "1/4", "1/6"])),
                    min_size=2, max_size=3), st.integers(1, 3))
    def test_esc_zero_iff_overlap(self, pairs, n):
        S = sims(pairs)
        d, _ = esc_min_distance(S, n)
        found = any(p.depth == n for p in exact_overlap_search(S, n).pairs)
        assert (d == 0) == found

    @given(st.lists(st.sampled_from(["1/2", "1/3", "1/5", "2/7"]), min_size=2, max_size=4, unique=True))
    def test_common_fixed_point_overlaps_at_two(self, slopes):
        rep = exact_overlap_search(sims([(r, "0") for r in slopes]), 2)
        assert rep.first_overlap_depth == 2


class TestEsc:
    def test_cantor(self, cantor):
        d, c = esc_min_distance(generated_self_similar(cantor), 2)
        assert d == pytest.approx(2 / 9)
        assert c == pytest.approx((2 / 9) ** 0.5)

    def test_broken(self, broken):
        assert esc_min_distance(generated_self_similar(broken), 2)[0] == 0

    def test_distinct_slopes_infinite(self):
        d, c = esc_min_distance(sims([("1/2", "0"), ("1/3", "1/2")]), 1)
        assert d == float("inf") and c is None


class TestPeriodic:
    def test_broken_zero_flagged(self, broken):
        (flag,) = periodic_critical_orbit_check(broken)
        assert flag.value == 0 and flag.map_index == 1 and flag.period == 1

    def test_cantor_no_flags(self, cantor):
        assert periodic_critical_orbit_check(cantor) == []

    def test_full_interval_no_flags(self, full):
        assert periodic_critical_orbit_check(full) == []

    def test_broken_cantor_bend_outside_union(self):
        assert periodic_critical_orbit_check(systems.broken_cantor()) == []


@pytest.mark.parametrize("name", ["cantor", "full_interval", "broken_cantor", "flipped_cantor", "three_map",
                                  "tent_pair"])
def test_orbit_radius_dominated_by_diagram(name):
    F = systems.REFERENCE_SYSTEMS[name]()
    assert not overlap_search_system(F, 6).has_overlap
    G, D = orbit_matrix(build_orbit_graph(F)), associated_matrix(grow_diagram(F))
    for s in (0.25, 0.5, 0.75, 1.0):
        assert pressure_from_matrix(G, s) <= pressure_from_matrix(D, s) + 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_orbit_radius_dominated_random(seed):
    F = systems.random_separated_system(np.random.default_rng(seed), with_breakpoint=True)
    G, D = orbit_matrix(build_orbit_graph(F)), associated_matrix(grow_diagram(F))
    for s in (0.25, 1.0):
        assert spectral_radius(G.materialize(s)) <= spectral_radius(D.materialize(s)) + 1e-9
