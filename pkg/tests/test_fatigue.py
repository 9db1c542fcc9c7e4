import io
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bladeprog.errors import CSVFormatError, DomainError, NonConvergenceError
from bladeprog.fatigue import (DamageParams, DamageState, DamageTrajectory, SNCurve,
                               accumulate_block, block_life, cycles_to_failure,
                               damage_fraction, damage_trajectory, equivalent_cycles, param_a,
                               read_trajectory_csv, sn_ratio, write_trajectory_csv)
from bladeprog.windload import YEAR_SECONDS, LoadBlock, LoadSpectrum

from conftest import constant_schedule


def lg_life_closed_form(ratio, curve):
    # algebraic inverse of the S-N relation, independent of the bisection path
    return curve.b * (-math.log(1.0 - (1.0 - ratio) / curve.m)) ** (1.0 / curve.a)


def lg_life_bisection(ratio, curve, lo=0.0, hi=60.0):
    f = lambda x: 1 + curve.m * (math.exp(-(x / curve.b) ** curve.a) - 1) - ratio
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


class TestSNCurve:
    def test_examples(self, blade_curve):
        assert sn_ratio(1.0, blade_curve) == 1.0
        with mp.workdps(30):
            direct = float(1 + (mp.exp(-(mp.mpf("7.0031") / mp.mpf("8.097")) ** mp.mpf("1.816")) - 1))
        assert direct == pytest.approx(0.46382, abs=3e-5)
        assert sn_ratio(10 ** 7.0031, blade_curve) == pytest.approx(direct, rel=1e-13)
        assert sn_ratio(1e300, blade_curve) < 1e-10
        assert sn_ratio(math.inf, blade_curve) == 0.0

    def test_reference_point(self, blade_curve):
        N = cycles_to_failure(718.0, blade_curve)
        ratio = 718.0 / 1548.0
        assert math.log10(N) == pytest.approx(lg_life_bisection(ratio, blade_curve), abs=1e-9)
        assert math.log10(N) == pytest.approx(lg_life_closed_form(ratio, blade_curve), abs=1e-9)
        assert math.log10(N) == pytest.approx(7.003, abs=0.01)

    def test_ultimate_stress(self, blade_curve):
        assert cycles_to_failure(1548.0, blade_curve) == 1.0

    @pytest.mark.parametrize("N", [1e2, 1e4, 1e6])
    def test_round_trip(self, blade_curve, N):
        sigma = sn_ratio(N, blade_curve) * blade_curve.sigma_ult
        back = cycles_to_failure(sigma, blade_curve)
        assert back == pytest.approx(N, rel=1e-8)
        assert abs(sn_ratio(back, blade_curve) - sigma / blade_curve.sigma_ult) <= 1e-9

    def test_errors(self, blade_curve):
        with pytest.raises(DomainError):
            cycles_to_failure(1600.0, blade_curve)
        with pytest.raises(DomainError):
            cycles_to_failure(0.0, blade_curve)
        with pytest.raises(DomainError):
            cycles_to_failure(500.0, SNCurve(m=0.5))  # ratio 0.32 below asymptote 0.5
        with pytest.raises(NonConvergenceError, match="iterations"):
            cycles_to_failure(1e-15, blade_curve)
        with pytest.raises(DomainError):
            sn_ratio(0.5, blade_curve)
        with pytest.raises(DomainError):
            SNCurve(a=0.0)

    @given(st.floats(0.01, 40.0), st.floats(1.001, 1.5))
    def test_decreasing(self, lg, f):
        curve = SNCurve()
        assert sn_ratio(10 ** (lg * f), curve) < sn_ratio(10 ** lg, curve)


class TestDamageLaw:
    def test_param_a(self):
        assert param_a(1.0) == pytest.approx(1.11, abs=1e-15)
        assert param_a(0.5) == pytest.approx(0.775, abs=1e-15)
        assert param_a(2.0, 1.0, 0.0) == 2.0
        assert DamageParams.from_b(0.1).A == pytest.approx(0.507, abs=1e-15)
        with pytest.raises(DomainError):
            param_a(1.0, -1.0, 0.5)
        with pytest.raises(DomainError):
            param_a(0.0)

    def test_endpoints(self):
        p = DamageParams.from_b(0.1)
        assert damage_fraction(0.0, 1e7, p) == 0.0
        assert damage_fraction(1e7, 1e7, p) == 1.0

    def test_half_life(self):
        p = DamageParams(1.11, 1.0)
        with mp.workdps(30):
            ref = float(1 - (1 - mp.mpf("0.5")) ** mp.mpf("1.11"))
        assert ref == pytest.approx(0.5367, abs=1e-4)
        assert damage_fraction(5e6, 1e7, p) == pytest.approx(ref, rel=1e-14)

    def test_errors(self):
        p = DamageParams(1.0, 1.0)
        with pytest.raises(DomainError):
            damage_fraction(2.0, 1.0, p)
        with pytest.raises(DomainError):
            damage_fraction(-1.0, 10.0, p)
        with pytest.raises(DomainError):
            equivalent_cycles(1.0, 10.0, p)
        with pytest.raises(DomainError):
            equivalent_cycles(-0.1, 10.0, p)

    def test_equivalent_cycles(self):
        p = DamageParams.from_b(0.1)
        assert equivalent_cycles(0.0, 1e7, p) == 0.0
        for frac in (0.1, 0.5, 0.9):
            n = frac * 1e7
            assert equivalent_cycles(damage_fraction(n, 1e7, p), 1e7, p) == pytest.approx(n, rel=1e-8)
        assert equivalent_cycles(0.25, 1e5, DamageParams(1.0, 1.0)) == pytest.approx(0.25e5, rel=1e-15)

    @settings(max_examples=200)
    # A >= q = 0.44 under the linear A-B relation
    @given(st.floats(0.0, 0.999), st.floats(0.44, 3.0), st.floats(0.05, 3.0))
    def test_inverse_property(self, D, A, B):
        p = DamageParams(A, B)
        n = equivalent_cycles(D, 1e6, p)
        assert abs(damage_fraction(min(n, 1e6), 1e6, p) - D) <= 1e-10

    @given(st.floats(1e-6, 0.99), st.floats(1.001, 1.01), st.floats(0.05, 3.0), st.floats(0.05, 3.0))
    def test_increasing(self, x, f, A, B):
        p = DamageParams(A, B)
        lo, hi = damage_fraction(x * 1e6, 1e6, p), damage_fraction(min(x * f, 1.0) * 1e6, 1e6, p)
        assert 0.0 <= lo <= hi <= 1.0


class TestAccumulation:
    def test_split_block(self, blade_curve, b01_params):
        N = cycles_to_failure(718.0, blade_curve)
        n = 0.3 * N
        one = accumulate_block(DamageState(), LoadBlock(718.0, n), blade_curve, b01_params)
        half = LoadBlock(718.0, n / 2)
        two = accumulate_block(accumulate_block(DamageState(), half, blade_curve, b01_params),
                               half, blade_curve, b01_params)
        assert abs(one.damage - two.damage) <= 1e-10

    def test_zero_cycles(self, blade_curve, b01_params):
        state = DamageState(0.3, 2.0)
        assert accumulate_block(state, LoadBlock(700.0, 0.0), blade_curve, b01_params) == state

    def test_full_life_block(self, blade_curve, b01_params):
        N = cycles_to_failure(600.0, blade_curve)
        state = accumulate_block(DamageState(), LoadBlock(600.0, N), blade_curve, b01_params)
        assert state.damage == 1.0 and state.failed

    def test_below_asymptote_no_damage(self, b01_params):
        curve = SNCurve(m=0.6)  # asymptote ratio 0.4
        state = DamageState(0.2)
        assert accumulate_block(state, LoadBlock(0.3 * 1548, 1e12), curve, b01_params) == state
        assert block_life(0.3 * 1548, curve) == math.inf

    def test_above_ultimate_single_cycle(self, blade_curve, b01_params):
        assert block_life(2000.0, blade_curve) == 1.0
        state = accumulate_block(DamageState(), LoadBlock(2000.0, 1.0), blade_curve, b01_params)
        assert state.damage == 1.0

    def test_failed_state_rejected(self, blade_curve, b01_params):
        with pytest.raises(DomainError):
            accumulate_block(DamageState(1.0), LoadBlock(700.0, 1.0), blade_curve, b01_params)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12), st.floats(0.05, 0.95))
    def test_partition_invariance(self, weights, frac):
        curve, params = SNCurve(), DamageParams.from_b(0.1)
        N = cycles_to_failure(650.0, curve)
        total = frac * N
        parts = np.array(weights) / sum(weights) * total
        state = DamageState()
        for c in parts:
            state = accumulate_block(state, LoadBlock(650.0, c), curve, params)
        assert abs(state.damage - damage_fraction(total, N, params)) <= 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 0.9), st.floats(100.0, 1500.0), st.floats(0.0, 1e8))
    def test_monotone(self, D, amp, cycles):
        curve, params = SNCurve(), DamageParams.from_b(0.3)
        after = accumulate_block(DamageState(D), LoadBlock(amp, cycles), curve, params)
        assert after.damage >= D


class TestTrajectory:
    def test_empty_blocks(self, blade_curve, b01_params):
        sched = [LoadSpectrum((), YEAR_SECONDS)] * 5
        traj = damage_trajectory(sched, blade_curve, b01_params, 4)
        assert np.all(traj.damage == 0.0)
        assert traj.times[-1] == pytest.approx(5.0)
        assert not traj.failed

    def test_constant_amplitude_closed_form(self, blade_curve, b01_params):
        sched, N = constant_schedule(life_years=30.0, horizon=25)
        traj = damage_trajectory(sched, blade_curve, b01_params, 12)
        rate = N / 30.0
        expected = [damage_fraction(min(rate * t, N), N, b01_params) for t in traj.times]
        assert np.max(np.abs(traj.damage - expected)) <= 1e-10

    def test_early_half(self, blade_curve, b01_params):
        sched, N = constant_schedule(life_years=25.0, horizon=25)
        traj = damage_trajectory(sched, blade_curve, b01_params, 4)
        oracle = 1 - (1 - 0.08 ** 0.1) ** 0.507
        assert traj.at(2.0) == pytest.approx(oracle, abs=1e-10)
        assert 0.45 <= traj.at(2.0) <= 0.55

    def test_failure_truncates(self, blade_curve, b01_params):
        sched, _ = constant_schedule(life_years=10.0, horizon=25)
        traj = damage_trajectory(sched, blade_curve, b01_params, 4)
        assert traj.failed
        assert traj.damage[-1] == 1.0
        assert traj.failure_time == pytest.approx(10.0, abs=0.25 + 1e-9)
        assert traj.times[-1] == traj.failure_time

    def test_dominance(self, blade_curve, b01_params):
        low = LoadSpectrum((LoadBlock(500.0, 2e5), LoadBlock(650.0, 1e5)), YEAR_SECONDS)
        high = LoadSpectrum((LoadBlock(520.0, 2e5), LoadBlock(680.0, 1e5)), YEAR_SECONDS)
        tl = damage_trajectory([low] * 20, blade_curve, b01_params, 4)
        th = damage_trajectory([high] * 20, blade_curve, b01_params, 4)
        n = min(tl.times.size, th.times.size)
        assert np.all(th.damage[:n] >= tl.damage[:n])

    def test_validation(self, blade_curve, b01_params):
        with pytest.raises(DomainError):
            damage_trajectory([], blade_curve, b01_params)
        with pytest.raises(DomainError):
            damage_trajectory([LoadSpectrum((), 1.0)], blade_curve, b01_params, 0)
        with pytest.raises(DomainError):
            DamageTrajectory([0.0, 1.0], [0.5, 0.2])

    def test_csv_round_trip(self, blade_curve, b01_params):
        sched, _ = constant_schedule(life_years=12.0, horizon=25)
        traj = damage_trajectory(sched, blade_curve, b01_params, 4)
        text = write_trajectory_csv(traj, io.StringIO())
        assert text.startswith("t_years,damage\n")
        back = read_trajectory_csv(text.encode())
        assert write_trajectory_csv(back, io.StringIO()) == text
        assert back.failed == traj.failed

    def test_csv_rejects_decreasing(self):
        with pytest.raises(CSVFormatError) as exc:
            read_trajectory_csv(b"t_years,damage\n0,0\n1,0.5\n2,0.4\n")
        assert exc.value.line == 4
