import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from remetric.errors import HorizonExhausted
from remetric.family import FunctionFamily, close_levels
from remetric.metricspace import FiniteMetricSpace, bound_metric, validate_metric
from remetric.moduli import ModulusSequence
from remetric.remetrize import (build_remetrization, equivalence_probe,
                                iterate_bound_report, naive_sup_metric,
                                tent_distance_shrink_check,
                                tent_expansion_witness, verify_level_bounds)
from remetric.sequences import GrowthSequence, build_envelope
from remetric.systems import make_rotation_system, make_tent_system

LN3 = math.log(3)


def tent_remetrization(level, c=1.0, horizon=4096, max_n=64):
    space, family = make_tent_system(level, c)
    bounded = bound_metric(space, c)
    levels = close_levels(family, max_n)
    env = build_envelope(GrowthSequence.log(), horizon)
    return build_remetrization(bounded, levels, env, c)


class TestBuild:
    def test_hand_values_on_five_points(self):
        rem = tent_remetrization(2)
        d = rem.dhat.dist
        idx = {lab: i for i, lab in enumerate(rem.dhat.labels)}
        assert d[idx["0.25"], idx["0.5"]] == pytest.approx(0.5 / LN3, abs=1e-15)
        assert d[idx["0.75"], idx["0.25"]] == 0.5  # orbits meet after one step
        assert d[idx["0.0"], idx["1.0"]] == 0.5

    def test_constant_generator_keeps_base(self):
        space = FiniteMetricSpace.from_points([0, 0.1, 0.3], cap=0.5)
        family = FunctionFamily(3, {"k": [1, 1, 1]})
        env = build_envelope(GrowthSequence.log(), 64)
        rem = build_remetrization(space, close_levels(family, 8), env, 1.0)
        assert np.array_equal(rem.dhat.dist, space.dist)

    def test_identity_family_keeps_base(self):
        space = FiniteMetricSpace.from_points([0, 0.1, 0.3], cap=0.5)
        family = FunctionFamily(3, {"e": [0, 1, 2]})
        env = build_envelope(GrowthSequence.log(), 64)
        rem = build_remetrization(space, close_levels(family, 4), env, 1.0)
        assert np.array_equal(rem.dhat.dist, space.dist)
        assert rem.certificate.reason == "stabilized"

    def test_sandwich_and_axioms(self):
        rem = tent_remetrization(6)
        assert (rem.base.dist <= rem.dhat.dist + 1e-15).all()
        assert rem.dhat.diameter <= 1.0
        assert validate_metric(rem.dhat).ok

    def test_unbounded_base_rejected(self):
        space = FiniteMetricSpace.from_points([0, 2.0])
        family = FunctionFamily(2, {"e": [0, 1]})
        env = build_envelope(GrowthSequence.log(), 8)
        with pytest.raises(ValueError, match="diameter"):
            build_remetrization(space, close_levels(family, 2), env, 1.0)

    def test_levels_exhausted_raises(self):
        space, family = make_tent_system(6, 1.0)
        bounded = bound_metric(space, 1.0)
        levels = close_levels(family, 3)  # closure needs 8 levels
        env = build_envelope(GrowthSequence.log(), 4096)
        with pytest.raises(HorizonExhausted):
            build_remetrization(bounded, levels, env, 1.0)

    def test_tail_bound_stop(self):
        # wide-gap two-point orbit: tail bound certifies before stabilization
        space = FiniteMetricSpace.from_points([0.0, 0.45], cap=0.5)
        family = FunctionFamily(2, {"s": [1, 0]})  # swap, an isometry
        env = build_envelope(GrowthSequence.linear(), 4096)
        rem = build_remetrization(space, close_levels(family, 64), env, 1.0)
        assert rem.certificate.reason in ("tail_bound", "stabilized")
        assert np.array_equal(rem.dhat.dist, space.dist)


class TestOracle:
    def test_matches_naive_on_tent(self):
        for level in (1, 2, 3):
            rem = tent_remetrization(level)
            naive = naive_sup_metric(rem.base, rem.levels, rem.envelope,
                                     rem.stop_level)
            assert np.abs(naive - rem.dhat.dist).max() <= 1e-12

    @given(st.integers(3, 10), st.data())
    @settings(max_examples=25)
    def test_matches_naive_on_random_small_maps(self, size, data):
        # bottleneck generators keep the closure (and word tree) small
        pool = data.draw(st.lists(st.integers(0, size - 1), min_size=3,
                                  max_size=3))
        g1 = data.draw(st.lists(st.sampled_from(pool), min_size=size,
                                max_size=size))
        g2 = data.draw(st.lists(st.sampled_from(pool), min_size=size,
                                max_size=size))
        pts = data.draw(st.lists(st.floats(0, 1), min_size=size, max_size=size,
                                 unique=True))
        space = bound_metric(FiniteMetricSpace.from_points(pts), 1.0)
        family = FunctionFamily(size, {"f": g1, "g": g2})
        levels = close_levels(family, 14)
        if levels.stabilized_at is None:
            return  # rare; the deterministic acceptance instances cover depth
        env = build_envelope(GrowthSequence.log(), 4096)
        rem = build_remetrization(space, levels, env, 1.0)
        if rem.stop_level > 12:
            return
        naive = naive_sup_metric(space, levels, env, rem.stop_level)
        assert np.abs(naive - rem.dhat.dist).max() <= 1e-12


class TestLevelBounds:
    def test_tent_level_one_ratio_is_envelope_base(self):
        rem = tent_remetrization(2)
        rep = verify_level_bounds(rem, ModulusSequence.loglin(64), 3)
        assert rep.ok
        row = rep.rows[0]
        assert row.worst_ratio == pytest.approx(LN3, abs=1e-12)
        d = rem.dhat.dist
        idx = {lab: i for i, lab in enumerate(rem.dhat.labels)}
        # the quarter-half pair attains the same stretch as the reported one
        assert d[idx["0.5"], idx["1.0"]] / d[idx["0.25"], idx["0.5"]] == \
            pytest.approx(row.worst_ratio, abs=1e-12)

    def test_identity_family_vacuous_levels(self):
        space = FiniteMetricSpace.from_points([0, 0.2, 0.4], cap=0.5)
        family = FunctionFamily(3, {"e": [0, 1, 2]})
        env = build_envelope(GrowthSequence.log(), 64)
        rem = build_remetrization(space, close_levels(family, 4), env, 1.0)
        rep = verify_level_bounds(rem, ModulusSequence.loglin(64), 3)
        assert rep.ok
        assert all(r.table_count == 0 for r in rep.rows)

    def test_iterate_report_tent(self):
        rem = tent_remetrization(6)
        rep = iterate_bound_report(rem, ModulusSequence.loglin(64), 10)
        assert rep.ok
        for r in rep.rows:
            assert r.worst_ratio <= r.b + 1e-9
            assert r.b <= math.log(r.n + 2) + 1e-12

    def test_missing_modulus_index(self):
        rem = tent_remetrization(2)
        with pytest.raises(IndexError):
            verify_level_bounds(rem, ModulusSequence.loglin(2), 5)


class TestEquivalence:
    def test_identity_family(self):
        space = FiniteMetricSpace.from_points([0, 0.2, 0.4], cap=0.5)
        family = FunctionFamily(3, {"e": [0, 1, 2]})
        env = build_envelope(GrowthSequence.log(), 64)
        rem = build_remetrization(space, close_levels(family, 4), env, 1.0)
        rep = equivalence_probe(rem, [0.25])
        assert rep.ok
        assert rep.rows[0].delta >= 0.25

    def test_tent_quarter_eps(self):
        rem = tent_remetrization(10)
        rep = equivalence_probe(rem, [0.25])
        assert rep.ok
        row = rep.rows[0]
        # first envelope value at or above diam/eps = 2 sits at level 256
        assert row.cutoff_level == 256
        assert row.confirmed

    def test_constant_family(self):
        space = FiniteMetricSpace.from_points([0, 0.2, 0.4], cap=0.5)
        family = FunctionFamily(3, {"k": [0, 0, 0]})
        env = build_envelope(GrowthSequence.log(), 64)
        rem = build_remetrization(space, close_levels(family, 4), env, 1.0)
        rep = equivalence_probe(rem, [0.25])
        assert rep.ok
        assert rep.rows[0].delta >= 0.25


class TestExpansionWitness:
    def test_witnesses_exist_on_deep_grid(self):
        rem = tent_remetrization(12)
        for n in (1, 2, 3):
            w = tent_expansion_witness(rem, n)
            assert w.ratio > 1.0
            assert w.margin > 0.0

    def test_identity_family_has_no_witness(self):
        grid_pts = np.arange(2 ** 6 + 1) / 2 ** 6
        space = FiniteMetricSpace.from_points(grid_pts, cap=0.5)
        family = FunctionFamily(len(grid_pts), {"e": np.arange(len(grid_pts))})
        env = build_envelope(GrowthSequence.log(), 4096)
        rem = build_remetrization(space, close_levels(family, 4), env, 1.0)
        with pytest.raises(ValueError):
            tent_expansion_witness(rem, 1)

    def test_shallow_grid_reports_needed_level(self):
        rem = tent_remetrization(3)
        with pytest.raises(ValueError, match="level"):
            tent_expansion_witness(rem, 1)


class TestShrinkCheck:
    def test_endpoint_inequality_holds(self):
        rem = tent_remetrization(12)
        rep = tent_distance_shrink_check(rem, ModulusSequence.loglin(64), 8)
        assert rep.ok
        assert rep.endpoint_distance == 0.5

    def test_weak_modulus_fails(self):
        rem = tent_remetrization(12)
        from remetric.moduli import Modulus
        weak = ModulusSequence.constant(Modulus.linear(0.5), 64)
        rep = tent_distance_shrink_check(rem, weak, 4)
        assert not rep.ok
