import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from remetric.errors import HorizonExhausted
from remetric.moduli import (Modulus, ModulusSequence, build_simple_minorants,
                             cap_modulus, check_liminf_floor,
                             check_modulus_conditions)

GRID = np.linspace(0.1, 5.0, 50)


class TestEval:
    def test_zero_at_zero(self):
        assert Modulus.simple(2, 1)(0.0) == 0.0

    def test_simple_cap_active(self):
        # min(2 * 0.75, 1) with the cap winning
        assert Modulus.simple(2, 1)(0.75) == 1.0

    def test_loglin_closed_form(self):
        assert Modulus.loglin(1)(1.0) == pytest.approx(1.0986122886681098, abs=1e-15)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            Modulus.simple(2, 1)(-0.1)
        with pytest.raises(ValueError):
            Modulus.loglin(3).values([-1.0, 0.5])

    def test_table_interpolation_and_extension(self):
        m = Modulus.table([(0, 0), (1, 1), (2, 1.5)])
        assert m(0.5) == 0.5
        assert m(1.5) == 1.25
        # extension keeps the last segment slope 0.5
        assert m(4.0) == pytest.approx(1.5 + 0.5 * 2.0)


class TestDerivativeAtZero:
    def test_simple(self):
        assert Modulus.simple(3, 0.5).derivative_at_zero == 3.0

    def test_loglin(self):
        assert Modulus.loglin(7).derivative_at_zero == pytest.approx(
            2.1972245773362196, abs=1e-15)

    def test_table_first_segment(self):
        m = Modulus.table([(0, 0), (1, 1), (2, 1.5)])
        assert m.derivative_at_zero == 1.0


class TestConditions:
    def test_simple_passes(self):
        assert check_modulus_conditions(Modulus.simple(2, 1), GRID).ok

    def test_ratio_violation_with_witness(self):
        m = Modulus.table([(0, 0), (1, 0.1), (2, 1)])
        rep = check_modulus_conditions(m, [1.0, 2.0])
        assert not rep.ok and not rep.ratio_nonincreasing
        wit = next(w for w in rep.witnesses if w.condition == "ratio_nonincreasing")
        assert wit.points == (1.0, 2.0)

    def test_loglin_passes_any_grid(self):
        assert check_modulus_conditions(Modulus.loglin(3), GRID).ok

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            check_modulus_conditions(Modulus.loglin(1), [])

    @given(st.floats(0.01, 20.0), st.floats(0.01, 50.0))
    def test_simple_always_valid(self, slope, cap):
        assert check_modulus_conditions(Modulus.simple(slope, cap), GRID).ok

    @given(st.integers(1, 500))
    def test_eval_monotone_and_ratio(self, n):
        m = Modulus.loglin(n)
        vals = m.values(GRID)
        assert (np.diff(vals) >= -1e-12).all()
        assert (np.diff(vals / GRID) <= 1e-12).all()


class TestCap:
    def test_linear_becomes_simple(self):
        capped = cap_modulus(Modulus.linear(1.0), 0.5)
        assert capped.kind == "simple"
        assert (capped.slope, capped.cap) == (1.0, 0.5)

    def test_inactive_cap(self):
        capped = cap_modulus(Modulus.simple(2, 1), 3.0)
        assert (capped.slope, capped.cap) == (2.0, 1.0)

    def test_min_of_caps(self):
        capped = cap_modulus(Modulus.simple(2, 1), 0.4)
        assert (capped.slope, capped.cap) == (2.0, 0.4)

    def test_table_capped(self):
        m = Modulus.table([(0, 0), (1, 1), (3, 2)])
        capped = cap_modulus(m, 1.25)
        for t in np.linspace(0, 6, 61):
            assert capped(t) == pytest.approx(min(m(t), 1.25), abs=1e-12)
        assert check_modulus_conditions(capped, GRID).ok

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            cap_modulus(Modulus.linear(1.0), 0.0)

    @given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.05, 5.0))
    def test_cap_preserves_validity(self, slope, cap0, cap):
        capped = cap_modulus(Modulus.simple(slope, cap0), cap)
        assert check_modulus_conditions(capped, GRID).ok
        assert capped.sup <= min(cap0, cap) + 1e-12


class TestLiminfFloor:
    def test_loglin_supported(self):
        rep = check_liminf_floor(ModulusSequence.loglin(256), 0.25,
                                 [0.1, 1.0], (100, 200))
        assert rep.supported
        row = rep.rows[0]
        # inf over the window sits at its left end for a rising family
        assert row.argmin_n == 100
        assert row.window_inf == pytest.approx(0.4624972813284271, abs=1e-15)

    def test_identity_slope_fails_derivative_clause(self):
        seq = ModulusSequence.constant(Modulus.linear(1.0), 256)
        rep = check_liminf_floor(seq, 0.25, [0.1], (100, 200))
        assert not rep.supported
        assert 1 in rep.derivative_failures

    def test_shrinking_family_refuted(self):
        mods = [Modulus.linear(1.0 / n) for n in range(1, 201)]
        seq = ModulusSequence.from_list(mods)
        rep = check_liminf_floor(seq, 0.25, [1.0], (100, 200))
        assert not rep.supported
        assert rep.rows[0].window_inf == pytest.approx(1 / 200)

    def test_degenerate_window(self):
        with pytest.raises(ValueError):
            check_liminf_floor(ModulusSequence.loglin(10), 0.25, [1.0], (5, 3))

    def test_certified_floor_reported(self):
        rep = check_liminf_floor(ModulusSequence.loglin(256), 0.25,
                                 [0.1, 1.0], (100, 200))
        assert rep.certified_floor == pytest.approx(0.1 * math.log(102))


class TestMinorants:
    def test_loglin_thresholds(self):
        res = build_simple_minorants(ModulusSequence.loglin(100), 1.0, 100)
        assert res.thresholds[:4] == ((1, 1), (2, 6), (3, 19), (4, 53))
        assert res.cut_indices == ()
        phi1 = res[1]
        assert phi1.slope == pytest.approx(math.log(3), abs=1e-15)
        assert phi1.cap == 1.0
        assert res.guaranteed_floor == 0.5

    def test_minorants_below_and_steep(self):
        seq = ModulusSequence.loglin(100)
        res = build_simple_minorants(seq, 1.0, 100)
        grid = np.linspace(0.1, 10.0, 100)
        for n in range(1, 101):
            phi, omega = res[n], seq[n]
            assert (phi.values(grid) <= omega.values(grid) + 1e-12).all()
            assert phi.derivative_at_zero > 1.0
            assert check_modulus_conditions(phi, grid).ok
        for m, start in res.thresholds:
            assert res[start].derivative_at_zero > m

    def test_slopes_exceed_any_bound_eventually(self):
        res = build_simple_minorants(ModulusSequence.loglin(100), 1.0, 100)
        for bound, (m, n_m) in zip((1.0, 2.0, 3.0), res.thresholds[:3]):
            assert all(res[n].derivative_at_zero > bound
                       for n in range(n_m, 101))

    def test_cut_minorants_before_first_threshold(self):
        # capped slopes keep early indices below the floor at t = 1
        mods = [Modulus.simple(2.0, n / 2.0) for n in range(1, 41)]
        seq = ModulusSequence.from_list(mods, monotone_in_n=True)
        res = build_simple_minorants(seq, 1.0, 40)
        assert res.thresholds[0] == (1, 3)
        assert res.cut_indices == (1, 2)
        grid = np.linspace(0.05, 10.0, 200)
        for n in (1, 2):
            phi = res[n]
            assert phi.derivative_at_zero > 1.0
            assert 0.0 < phi.sup < 1.0
            assert (phi.values(grid) <= seq[n].values(grid) + 1e-12).all()
        assert res.guaranteed_floor == pytest.approx(0.5 * res[1].sup)

    def test_flat_sequence_gate(self):
        seq = ModulusSequence.constant(Modulus.linear(1.0), 50)
        with pytest.raises(ValueError, match="floor condition violated"):
            build_simple_minorants(seq, 1.0, 50)

    def test_horizon_exhausted_names_first_threshold(self):
        # slopes above 1 but values never clear the floor within the horizon
        mods = [Modulus.simple(2.0, 0.5) for _ in range(20)]
        seq = ModulusSequence.from_list(mods, monotone_in_n=True)
        with pytest.raises(HorizonExhausted):
            build_simple_minorants(seq, 1.0, 20)

    def test_unmarked_sequence_needs_witness(self):
        mods = [Modulus.loglin(n) for n in range(1, 10)]
        seq = ModulusSequence.from_list(mods)  # not certified monotone
        with pytest.raises(ValueError, match="monotone"):
            build_simple_minorants(seq, 1.0, 9)
        res = build_simple_minorants(seq, 1.0, 9, tail_witness=lambda m: 1 if m == 1 else None)
        assert res.thresholds == ((1, 1),)
