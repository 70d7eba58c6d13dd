import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from remetric.errors import TableBudgetExceeded
from remetric.family import (FunctionFamily, chained_delta_probe, close_levels,
                             equicontinuity_profile, word_length)
from remetric.metricspace import FiniteMetricSpace
from remetric.systems import make_rotation_system, make_tent_system


def shift_family(q=12):
    return FunctionFamily(q, {"h": (np.arange(q) + 1) % q},
                          closed_under_inverse=True)


class TestCloseLevels:
    def test_cyclic_shift_stabilizes_halfway(self):
        levels = close_levels(shift_family(12), 10)
        assert levels.stabilized_at == 6
        assert levels.distinct_count() == 12
        # level 1 holds the shift and its inverse; id stays at level 0
        assert [len(t) for t in levels.levels] == [1, 2, 2, 2, 2, 2, 1]

    def test_tent_levels_distinct(self):
        _, family = make_tent_system(2, 1.0)
        levels = close_levels(family, 3)
        assert [len(t) for t in levels.levels] == [1, 1, 1, 1]
        assert levels.stabilized_at == 3

    def test_empty_generator_set(self):
        family = FunctionFamily(4, {})
        levels = close_levels(family, 5)
        assert levels.max_level == 0
        assert levels.stabilized_at == 0

    def test_budget_enforced(self):
        _, family = make_tent_system(6, 1.0)
        with pytest.raises(TableBudgetExceeded):
            close_levels(family, 10, table_budget=3)

    def test_boundary_stabilization_detected(self):
        # frontier still live at max_n, but the probe round finds nothing new
        sp, family = make_rotation_system(12, 1.0)
        levels = close_levels(family, 6)
        assert levels.stabilized_at == 6


class TestWordLength:
    def test_identity_is_zero(self):
        levels = close_levels(shift_family(), 8)
        assert word_length(levels, np.arange(12)) == 0

    def test_power_five(self):
        levels = close_levels(shift_family(), 8)
        h5 = (np.arange(12) + 5) % 12
        assert word_length(levels, h5) == 5

    def test_power_seven_uses_inverse(self):
        levels = close_levels(shift_family(), 8)
        h7 = (np.arange(12) + 7) % 12
        assert word_length(levels, h7) == 5

    def test_unreached_reported_as_none(self):
        _, family = make_tent_system(2, 1.0)
        levels = close_levels(family, 1)
        t3 = np.zeros(5, dtype=np.int64)
        assert word_length(levels, t3) is None

    def test_wrong_size_rejected(self):
        levels = close_levels(shift_family(), 2)
        with pytest.raises(ValueError):
            word_length(levels, np.arange(5))

    def test_inverse_symmetry(self):
        # the length metric is symmetric under inversion
        rng = np.random.default_rng(3)
        perm = rng.permutation(7)
        family = FunctionFamily(7, {"g": perm}, closed_under_inverse=True)
        levels = close_levels(family, 10)
        for _, table in levels.all_tables():
            inv = np.argsort(table)
            assert word_length(levels, table) == word_length(levels, inv)


def brute_force_words(family, n):
    """Tables of all words of length exactly n, composed generator by generator."""
    eff = [t for _, t in family.effective_generators()]
    tables = [family.identity_table()]
    for _ in range(n):
        tables = [g[t] for g in eff for t in tables]
    return {t.tobytes() for t in tables}


class TestDedupSoundness:
    @given(st.integers(2, 16), st.integers(1, 4), st.data())
    @settings(max_examples=30)
    def test_words_covered_by_minimal_levels(self, size, n, data):
        g1 = data.draw(st.lists(st.integers(0, size - 1), min_size=size,
                                max_size=size))
        g2 = data.draw(st.lists(st.integers(0, size - 1), min_size=size,
                                max_size=size))
        family = FunctionFamily(size, {"f": g1, "g": g2})
        levels = close_levels(family, n)
        seen = {t.tobytes(): lvl for lvl, t in
                ((lvl, t) for lvl, t in levels.all_tables())}
        for key in brute_force_words(family, n):
            assert key in seen and seen[key] <= n

    def test_left_right_composition_agree_setwise(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            size = 6
            g1, g2 = rng.integers(0, size, size), rng.integers(0, size, size)
            family = FunctionFamily(size, {"f": g1, "g": g2})
            eff = [t for _, t in family.effective_generators()]
            for n in range(1, 5):
                left = brute_force_words(family, n)
                right = {family.identity_table().tobytes()}
                tables = [family.identity_table()]
                for _ in range(n):
                    tables = [t[g] for g in eff for t in tables]
                right = {t.tobytes() for t in tables}
                assert left == right

    def test_exact_levels_nested_with_identity(self):
        sp, family = make_rotation_system(8, 1.0)
        levels = close_levels(family, 6)
        prev = set()
        for n in range(5):
            cur = {t.tobytes() for t in levels.exact_level_tables(n)}
            assert prev <= cur
            prev = cur


class TestEquicontinuityProfile:
    def test_isometry_delta_equals_eps_gap(self):
        space, family = make_rotation_system(12, 1.0)
        levels = close_levels(family, 4)
        prof = equicontinuity_profile(levels, space, 2, [0.2])
        # smallest arc distance beyond 0.2 is 3/12
        assert prof.rows[0].delta == pytest.approx(0.25)

    def test_tent_level3_delta(self):
        space, family = make_tent_system(10, 1.0)
        levels = close_levels(family, 3)
        prof = equicontinuity_profile(levels, space, 3, [0.1])
        # slope 8 pushes pairs just past 0.1/8; the grid gap lands on 13/1024
        assert prof.rows[0].delta == pytest.approx(13 / 1024, abs=0)

    def test_constant_maps_unbounded_delta(self):
        family = FunctionFamily(4, {"k0": [0, 0, 0, 0], "k2": [2, 2, 2, 2]})
        space = FiniteMetricSpace.from_points([0, 0.3, 0.6, 1.0])
        levels = close_levels(family, 3)
        prof = equicontinuity_profile(levels, space, 2, [0.05])
        assert math.isinf(prof.rows[0].delta)


class TestChainedDelta:
    def test_identity_family_keeps_eps(self):
        family = FunctionFamily(4, {"id2": [0, 1, 2, 3]})
        space = FiniteMetricSpace.from_points([0, 0.25, 0.5, 1.0])
        rep = chained_delta_probe(close_levels(family, 4), space, 0.3, 3)
        assert rep.ok
        deltas = {r.delta for r in rep.rows}
        assert len(deltas) == 1

    def test_tent_halves_each_level(self):
        space, family = make_tent_system(10, 1.0)
        rep = chained_delta_probe(close_levels(family, 5), space, 0.1, 4)
        assert rep.ok
        last = rep.rows[-1].delta
        assert 0.1 / 16 <= last <= 0.1 / 16 + 8 / 1024

    def test_commuting_isometries_flat_chain(self):
        q = 12
        family = FunctionFamily(q, {"a": (np.arange(q) + 1) % q,
                                    "b": (np.arange(q) + 2) % q})
        space, _ = make_rotation_system(q, 1.0)
        rep = chained_delta_probe(close_levels(family, 5), space, 0.2, 4)
        assert rep.ok
        assert len({r.delta for r in rep.rows}) == 1
