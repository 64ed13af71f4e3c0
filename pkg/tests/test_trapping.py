import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_admissible_system
from darkstate import (
    D1System,
    D2System,
    DivisionByZeroDrive,
    DriveField,
    d1_to_chain,
    d1_trapping_check,
    fgc_central_numerator,
    fgc_check,
    fgc_solve,
    preset,
    sgc_constant_term,
    sgc_feasible,
    spectrum_analytic,
)


class TestSgcInfeasibility:
    def test_constant_term_positive_on_random_systems(self, rng):
        for _ in range(200):
            s = random_admissible_system(rng)
            c0 = sgc_constant_term(s)
            w = sgc_feasible(s)
            if abs(s.rabi[1] * s.rabi[3]) > 0 or abs(s.rabi[0] * s.rabi[2]) > 0:
                assert c0.real > 0
                assert not w.feasible
            assert c0.real >= w.real_part_lower_bound - 1e-9

    def test_trivial_case_flagged(self):
        s = D2System(gamma=(1, 1, 1), omega12=13, omega23=13,
                     drives=(DriveField(0),) * 4)
        w = sgc_feasible(s)
        assert w.trivial and not w.feasible
        assert w.constant_term == 0


class TestFgcCondition:
    def test_trapping_preset_satisfied(self):
        rep = fgc_check(preset("fig2-trapping").system)
        assert rep.satisfied
        assert abs(rep.magnitude_condition) < 1e-12
        assert abs(rep.phase_condition) < 1e-12
        assert rep.gamma_condition == 0.0

    def test_notrapping_preset_phase_residual(self):
        rep = fgc_check(preset("fig2-notrapping").system)
        assert not rep.satisfied
        # phi2 + phi3 = 2 pi, so the wrapped distance from pi is pi
        assert abs(rep.phase_condition) == pytest.approx(math.pi, abs=1e-12)

    def test_numerator_vanishes_under_condition(self):
        s = preset("fig2-trapping").system
        deltas = np.linspace(-40, 40, 1001)
        residual = np.abs(fgc_central_numerator(s, deltas))
        assert np.max(residual) < 1e-12

    def test_numerator_nonzero_otherwise(self):
        s = preset("fig2-notrapping").system
        assert abs(fgc_central_numerator(s, 0.7)) > 0.1

    def test_magnitude_imbalance_detected(self):
        s = preset("fig2-trapping").system
        drives = list(s.drives)
        drives[3] = DriveField(2.5, 0.0)
        rep = fgc_check(s.with_drives(drives))
        assert not rep.satisfied
        assert rep.magnitude_condition != 0.0

    def test_rate_imbalance_detected(self):
        s = preset("fig2-trapping").system
        uneven = D2System(gamma=(1.0, 1.0, 1.4), omega12=13, omega23=13,
                          drives=s.drives)
        rep = fgc_check(uneven)
        assert not rep.satisfied
        assert rep.gamma_condition == pytest.approx(-0.4)


class TestFgcSolve:
    def test_preset_completion(self):
        drives = fgc_solve(2.0, 1.0, 1.0, math.pi)
        assert drives[3].magnitude == pytest.approx(2.0)
        assert drives[2].phase == pytest.approx(0.0, abs=1e-12)

    def test_zero_inner_drive_rejected(self):
        with pytest.raises(DivisionByZeroDrive):
            fgc_solve(2.0, 1.0, 0.0, math.pi)

    @settings(max_examples=50, deadline=None)
    @given(
        m1=st.floats(0.1, 3.0), m2=st.floats(0.1, 3.0),
        m3=st.floats(0.1, 3.0),
        phi2=st.floats(0.0, 2.0 * math.pi, exclude_max=True),
    )
    def test_solved_fields_always_satisfy_condition(self, m1, m2, m3, phi2):
        drives = fgc_solve(m1, m2, m3, phi2)
        s = D2System(gamma=(1, 1, 1), omega12=13, omega23=13, drives=drives)
        rep = fgc_check(s, tol=1e-9)
        assert rep.satisfied

    def test_solved_system_has_dark_central_branch(self):
        drives = fgc_solve(1.3, 0.8, 0.6, 2.1)
        s = D2System(gamma=(1, 1, 1), omega12=13, omega23=13, drives=drives)
        spec = spectrum_analytic(s, np.linspace(-30, 30, 601))
        peak = np.max(spec.total)
        assert np.max(spec.branch_intensity[1]) < 1e-20 * peak


class TestD1Trapping:
    def test_trapping_presets_satisfied(self):
        for name in ("d1-trapping", "d1-fig3c", "d1-fig3f"):
            assert d1_trapping_check(preset(name).system).satisfied

    def test_non_trapping_presets_rejected(self):
        for name in ("d1-fig3a", "d1-fig3b", "d1-fig3d", "d1-fig3e"):
            assert not d1_trapping_check(preset(name).system).satisfied

    def test_magnitude_break_detected(self):
        s = preset("d1-trapping").system
        broken = D1System(gamma=s.gamma,
                          optical1=DriveField(s.optical1.magnitude * 1.01,
                                              s.optical1.phase),
                          optical2=s.optical2, microwave1=s.microwave1,
                          microwave2=s.microwave2)
        assert not d1_trapping_check(broken).satisfied

    def test_condition_equals_chain_central_numerator(self):
        # the D1 condition is the chain's central-branch numerator at work:
        # satisfied iff the mapped chain spectrum is identically zero
        s = preset("d1-trapping").system
        chain = d1_to_chain(s)
        deltas = np.linspace(-20, 20, 101)
        residual = np.abs(fgc_central_numerator(chain, deltas))
        # gamma1 != gamma3 plays no role here since both are zero
        assert np.max(residual) < 1e-12


class TestGaugeInvariance:
    def test_phase_shift_pair_leaves_spectrum_unchanged(self, rng):
        grid = np.linspace(-30, 30, 301)
        for _ in range(5):
            s = random_admissible_system(rng)
            alpha = rng.uniform(0, 2 * math.pi)
            drives = list(s.drives)
            drives[1] = DriveField(drives[1].magnitude,
                                   drives[1].phase + alpha)
            drives[2] = DriveField(drives[2].magnitude,
                                   drives[2].phase - alpha)
            shifted = s.with_drives(drives)
            a = spectrum_analytic(s, grid)
            b = spectrum_analytic(shifted, grid)
            scale = np.max(a.total) + 1e-300
            assert np.max(np.abs(a.total - b.total)) / scale < 1e-10
