import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cplifs import systems
from cplifs.continuity_lab import (PerturbationSpec, best_dimension, broken_zero_formula_check, broken_zero_length,
                                   continuity_sweep, discontinuity_report, lebesgue_positivity_experiment,
                                   lebesgue_verdict, perturb, semicontinuity_check)
from cplifs.errors import InfeasiblePerturbation
from cplifs.ifs_core import cplifs_distance
from cplifs.pressure import moran_dimension

from conftest import LOG2_LOG3

FIXED_SHIFT = dict(mode={"translations"}, maps=(2,), distribution="fixed", strict_partition=False, trials=1)


class TestPerturb:
    def test_zero_delta_is_identity(self, broken):
        assert perturb(broken, PerturbationSpec(0.0)) is broken

    def test_fixed_shift_gives_shifted_system(self, broken):
        hat = perturb(broken, PerturbationSpec(1e-3, **FIXED_SHIFT))
        assert hat.maps[1].offset == pytest.approx(1e-3, abs=1e-18)
        assert hat.maps[0].slopes == (0.4, 0.2)

    def test_breakpoint_mode_keeps_counts(self):
        F = systems.broken_cantor()
        for trial in range(5):
            hat = perturb(F, PerturbationSpec(1e-3, mode={"breakpoints"}, seed=3), trial)
            assert hat.type_vector == F.type_vector
            assert hat.maps[0].breakpoints != F.maps[0].breakpoints

    def test_deterministic(self, cantor):
        spec = PerturbationSpec(1e-3, mode={"translations", "slopes"}, seed=11)
        assert perturb(cantor, spec, 4) == perturb(cantor, spec, 4)
        assert perturb(cantor, spec, 4) != perturb(cantor, spec, 5)

    def test_infeasible_fixed_shift(self, cantor):
        # a fixed shift moves the partition by more than delta, so the strict check fails
        with pytest.raises(InfeasiblePerturbation):
            perturb(cantor, PerturbationSpec(1e-3, distribution="fixed"))

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            PerturbationSpec(-1.0)
        with pytest.raises(ValueError):
            PerturbationSpec(1e-3, mode={"offsets"})

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from(["cantor", "broken_cantor", "flipped_cantor", "tent_pair", "three_map"]),
           st.floats(1e-6, 1e-2), st.integers(0, 2**16),
           st.sets(st.sampled_from(["translations", "breakpoints", "slopes"]), min_size=1))
    def test_closeness_guarantee(self, name, delta, seed, mode):
        F = systems.REFERENCE_SYSTEMS[name]()
        hat = perturb(F, PerturbationSpec(delta, mode=mode, seed=seed))
        assert cplifs_distance(F, hat).epsilon <= delta * (1 + 1e-9)


class TestSemicontinuity:
    def test_identity(self, broken):
        rep = semicontinuity_check(broken, broken, [0.2, 0.4, 0.6])
        assert not rep.lower_violations and not rep.upper_violations

    def test_cantor_small_shift(self, cantor):
        hat = perturb(cantor, PerturbationSpec(1e-4, seed=1))
        rep = semicontinuity_check(cantor, hat, [0.3, 0.5, 0.63, 0.8])
        assert not rep.lower_violations and not rep.upper_violations

    def test_broken_pair_upper_holds(self, broken):
        hat = perturb(broken, PerturbationSpec(1e-3, **FIXED_SHIFT))
        rep = semicontinuity_check(broken, hat, [0.3, 0.5, 0.6, 0.69])
        assert not rep.upper_violations
        # the pressure drops by more than the band, which is the discontinuity
        assert rep.lower_violations


class TestSweep:
    def test_cantor_gap_shrinks(self, cantor):
        spec = PerturbationSpec(1.0, mode={"translations", "slopes"}, seed=2, trials=10)
        rows = list(continuity_sweep(cantor, [1e-3, 1e-5], spec))
        big = [r.gap for r in rows if r.delta == 1e-3]
        small = [r.gap for r in rows if r.delta == 1e-5]
        assert max(big + small) < 0.05
        assert np.median(small) < np.median(big)
        assert not any(r.overlap_flag or r.periodic_flag for r in rows)

    def test_zero_delta_rows(self, cantor):
        rows = list(continuity_sweep(cantor, [0.0], PerturbationSpec(1.0, trials=2)))
        assert [r.gap for r in rows] == [0.0, 0.0]

    def test_broken_gap_persists(self, broken):
        rows = list(continuity_sweep(broken, [1e-2, 1e-3, 1e-4], PerturbationSpec(1.0, **FIXED_SHIFT)))
        assert all(r.gap >= 0.05 for r in rows)
        assert all(r.overlap_flag and r.periodic_flag for r in rows)

    def test_row_layout(self, cantor):
        (row,) = continuity_sweep(cantor, [1e-4], PerturbationSpec(1.0, trials=1))
        assert len(row.row()) == 9 and row.gap >= 0


class TestBrokenZero:
    def test_formula_first_level(self):
        assert broken_zero_length(1, 1) == pytest.approx(3 / 10)
        assert broken_zero_length(1, 0) == pytest.approx(1 / 3)

    def test_formula_matches_enumeration(self):
        rows = broken_zero_formula_check(12)
        assert [r[1] for r in rows] == [2 ** n for n in range(1, 13)]
        assert max(r[2] for r in rows) <= 1e-12

    def test_report(self):
        rep = discontinuity_report(1e-3, 10)
        assert rep.s_moran == pytest.approx(moran_dimension([1 / 3, 1 / 5]))
        for e, s in rep.s_hat_direct.items():
            assert s == pytest.approx(rep.s_moran, abs=2e-3)
        assert rep.persists
        assert "GAP-PERSISTS" in rep.text()

    def test_eps_range(self):
        with pytest.raises(ValueError):
            discontinuity_report(0.2)


class TestLebesgue:
    def test_thick_pair(self):
        (row,) = lebesgue_positivity_experiment(systems.thick_pair(), PerturbationSpec(0.0, trials=1), 8)
        assert row.s_hat == pytest.approx(math.log(2) / math.log(10 / 7), abs=1e-2)
        assert row.estimates == pytest.approx((1.0, 1.0, 1.0))
        assert row.verdict == "plateau"

    def test_cantor_decays(self, cantor):
        (row,) = lebesgue_positivity_experiment(cantor, PerturbationSpec(0.0, trials=1), 6)
        assert row.estimates == pytest.approx(tuple((2 / 3) ** d for d in (6, 8, 10)), rel=1e-12)
        assert row.verdict == "decay"
        assert row.s_hat == pytest.approx(LOG2_LOG3, abs=1e-6)

    def test_broken_decays_despite_positive_dimension(self, broken):
        (row,) = lebesgue_positivity_experiment(broken, PerturbationSpec(0.0, trials=1), 6)
        assert row.verdict == "decay" and row.s_hat > 0.5

    def test_perturbed_trials(self):
        rows = lebesgue_positivity_experiment(systems.thick_pair(), PerturbationSpec(1e-3, seed=5, trials=3), 6)
        assert [r.trial for r in rows] == [0, 1, 2]
        assert all(r.verdict == "plateau" for r in rows)

    def test_verdict_thresholds(self):
        assert lebesgue_verdict(1.0, 0.9) == "plateau"
        assert lebesgue_verdict(1.0, 0.3) == "decay"
        assert lebesgue_verdict(1.0, 0.6) == "inconclusive"


def test_best_dimension_prefers_closed_diagram(cantor):
    assert best_dimension(cantor).method == "markov"
    assert best_dimension(systems.thick_pair(), r=5).method == "direct"
