import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from tmqi.errors import DegenerateModelError, InvalidArgumentError, NoSolutionError
from tmqi.noise_model import (
    CH1,
    CH2,
    S_MAX,
    UNBOUNDED,
    ChannelParams,
    DecayKind,
    DecayModel,
    bell_parameter,
    bell_vs_time,
    excitation_probability,
    invert_gamma_for_bell,
    max_modes,
    noise_suppression_factor,
    p_antistokes,
    p_coincidence,
    p_stokes,
    visibility_approx,
    visibility_exact,
)

unit = st.floats(0.0, 1.0)
small_chi = st.floats(1e-4, 0.05)


@st.composite
def channels(draw, chi=small_chi):
    return ChannelParams(
        chi=draw(chi),
        gamma=draw(st.floats(0.02, 1.0)),
        xi_se=draw(st.just(0.0) | st.floats(1e-3, 1.0)),
        beta_ratio=draw(st.just(0.0) | st.floats(1e-3, 5.0)),
        v0=draw(unit),
        eta_w=draw(st.floats(0.05, 1.0)),
        eta_r=draw(st.floats(0.05, 1.0)),
    )


def test_presets_match_quoted_fit_parameters():
    assert (CH1.chi, CH1.gamma, CH1.xi_se, CH1.v0) == (0.01, 0.158, 0.093, 0.91)
    assert CH1.write_to_read_ratio == pytest.approx(1.7, rel=1e-15)
    assert (CH2.gamma, CH2.beta_ratio) == (0.167, 1.0)
    assert CH1.theta_schmidt == pytest.approx(0.81 * math.pi / 4)
    assert CH1.eta_w == CH1.eta_r == 1.0


def test_params_validation_and_chi_warning():
    with pytest.raises(InvalidArgumentError):
        CH1.with_(gamma=1.2)
    with pytest.raises(InvalidArgumentError):
        CH1.with_(beta_ratio=-0.1)
    with pytest.raises(InvalidArgumentError):
        CH1.with_(theta_schmidt=2.0)
    with pytest.warns(RuntimeWarning, match="chi"):
        CH1.with_(chi=0.2)
    assert CH1.n_spin_excitations is None
    assert CH1.with_(beta_w_abs=0.02).n_spin_excitations == pytest.approx(0.5)


class TestExcitationProbability:
    def test_examples(self):
        assert excitation_probability(0.01, 14) == pytest.approx(0.14)
        assert excitation_probability(0.01, 1) == 0.01
        assert excitation_probability(0.01, 5) == pytest.approx(0.05)

    def test_linear_series(self):
        vals = [excitation_probability(0.01, m) for m in range(1, 15)]
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        assert all(d == pytest.approx(0.01, abs=1e-15) for d in diffs)

    def test_zero_modes_rejected(self):
        with pytest.raises(InvalidArgumentError):
            excitation_probability(0.01, 0)

    def test_clamp_warns(self):
        with pytest.warns(RuntimeWarning):
            assert excitation_probability(0.3, 5) == 1.0


def test_p_stokes_examples():
    base = CH1.with_(eta_w=0.5)
    assert p_stokes(base) == pytest.approx(0.005)
    assert p_stokes(base.with_(chi=0.0)) == 0.0
    assert p_stokes(CH1) == 0.01


class TestAntiStokes:
    def test_ch1_m14_by_hand(self):
        b = p_antistokes(CH1, 14)
        # hand evaluation of the three terms
        signal = 0.01 * 0.158
        retrieval = 0.01 * (1 - 0.158) * (1 / 1.7) * 0.093
        multimode = 13 * 0.01 * (1 / 1.7) * 0.093
        assert b.signal == pytest.approx(signal, rel=1e-12)
        assert b.imperfect_retrieval_noise == pytest.approx(retrieval, rel=1e-12)
        assert b.multimode_noise == pytest.approx(multimode, rel=1e-12)
        assert b.total == pytest.approx(0.00915, abs=5e-6)
        assert b.signal == pytest.approx(0.00158, abs=5e-6)
        assert b.imperfect_retrieval_noise == pytest.approx(0.00046, abs=5e-6)
        assert b.multimode_noise == pytest.approx(0.00711, abs=5e-6)

    def test_perfect_single_mode(self):
        b = p_antistokes(CH1.with_(gamma=1.0), 1)
        assert b.noise == 0.0
        assert b.total == pytest.approx(CH1.chi * CH1.eta_r)

    def test_zero_read_angle(self):
        b = p_antistokes(CH1.with_(beta_ratio=0.0), 14)
        assert b.total == pytest.approx(CH1.chi * CH1.gamma * CH1.eta_r)

    def test_m_zero(self):
        with pytest.raises(InvalidArgumentError):
            p_antistokes(CH1, 0)

    @given(channels(), st.integers(1, 200))
    def test_term_identity(self, p, m):
        b = p_antistokes(p, m)
        assert b.total == b.signal + b.imperfect_retrieval_noise + b.multimode_noise
        for v in (b.signal, b.imperfect_retrieval_noise):
            assert 0.0 <= v <= 1.0


class TestCoincidence:
    def test_ch1(self):
        true, acc = p_coincidence(CH1, 14)
        assert true == pytest.approx(0.00158, rel=1e-12)
        assert acc == pytest.approx(0.01 * p_antistokes(CH1, 14).total, rel=1e-12)
        assert acc == pytest.approx(9.15e-5, abs=5e-8)

    def test_vacuum(self):
        assert p_coincidence(CH1.with_(chi=0.0), 14) == (0.0, 0.0)

    def test_single_mode_perfect_retrieval(self):
        p = CH1.with_(gamma=1.0, beta_ratio=3.0, eta_w=0.4, eta_r=0.6)
        _, acc = p_coincidence(p, 1)
        assert acc == pytest.approx(p.chi**2 * p.eta_w * p.eta_r, rel=1e-12)


class TestVisibility:
    def test_noiseless_limit(self):
        p = CH1.with_(chi=1e-300)
        assert visibility_exact(p, 1) == pytest.approx(p.v0, rel=1e-12)

    def test_ch1_single_mode_matches_closed_form(self):
        chi, g, xi, br = 0.01, 0.158, 0.093, 1 / 1.7
        oracle = 0.91 / (1 + 2 * (chi + chi * (1 - g) * xi * br / g))
        assert visibility_exact(CH1, 1) == pytest.approx(oracle, rel=1e-12)
        assert visibility_exact(CH1, 1) == pytest.approx(0.8871, abs=5e-5)

    def test_zero_v0(self):
        assert visibility_exact(CH1.with_(v0=0.0), 3) == 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateModelError):
            visibility_exact(CH1.with_(gamma=0.0), 1)
        with pytest.raises(DegenerateModelError):
            visibility_approx(CH1.with_(gamma=0.0), 2)

    def test_approx_examples(self):
        # quoted values come from a denominator rounded to 4 decimals
        assert visibility_approx(CH1, 14) == pytest.approx(0.91 / 1.0900, abs=1e-4)
        assert visibility_approx(CH1, 14) == pytest.approx(0.8349, abs=1e-4)
        assert visibility_approx(CH2, 14) == pytest.approx(0.91 / 1.1448, abs=1e-4)
        assert visibility_approx(CH2, 14) == pytest.approx(0.7949, abs=1e-4)
        assert visibility_approx(CH1, 1) == CH1.v0
        assert visibility_approx(CH1, 1, "use_exact_v1") == visibility_exact(CH1, 1)

    @given(channels(), st.integers(1, 60))
    def test_conventions_agree_at_one_mode(self, p, m):
        assert visibility_approx(p, 1, "use_exact_v1") == pytest.approx(visibility_exact(p, 1), abs=1e-12)

    @given(channels(), st.integers(1, 80))
    def test_monotone_in_m(self, p, m):
        a, b = visibility_approx(p, m), visibility_approx(p, m + 1)
        if p.chi * p.xi_se * p.beta_ratio > 0 and p.v0 > 0:
            assert b < a
        else:
            assert b == a

    @given(channels(), st.integers(2, 80), st.floats(0.1, 0.9))
    def test_monotone_in_beta_ratio(self, p, m, shrink):
        if p.chi * p.xi_se * p.beta_ratio == 0 or p.v0 == 0:
            return
        smaller = p.with_(beta_ratio=p.beta_ratio * shrink)
        assert visibility_approx(smaller, m) > visibility_approx(p, m)

    def test_first_order_gap_is_ab_over_one_plus_a_plus_b(self):
        # exact V = v0/(1+a+b), first-order V = v0/((1+a)(1+b))
        for p in (CH1, CH2):
            a = 2 * p.chi * (1 + (1 - p.gamma) * p.beta_ratio * p.xi_se / p.gamma)
            for m in range(1, 101):
                b = 2 * p.chi * (m - 1) * p.xi_se * p.beta_ratio / p.gamma
                ex = visibility_exact(p, m)
                ap = visibility_approx(p, m, "use_exact_v1")
                assert (ex - ap) / ap == pytest.approx(a * b / (1 + a + b), abs=1e-12)

    def test_first_order_within_one_percent_sweep(self):
        # brute-force sweep over chi <= 0.01, the preset channels, m <= 50
        worst = {}
        for name, base in (("CH1", CH1), ("CH2", CH2)):
            for chi in (0.001, 0.0025, 0.005, 0.0075, 0.01):
                p = base.with_(chi=chi)
                for m in range(1, 51):
                    ex = visibility_exact(p, m)
                    rel = abs(visibility_approx(p, m, "use_exact_v1") - ex) / ex
                    worst[(name, chi, m)] = rel
        over = {k: v for k, v in worst.items() if v >= 0.01}
        # the symmetric channel just crosses 1 % at m = 50 with chi = 0.01
        assert set(over) <= {("CH2", 0.01, 50)}
        assert over[("CH2", 0.01, 50)] == pytest.approx(0.010043, abs=5e-6)
        assert max(v for k, v in worst.items() if k[2] <= 49) < 0.01


class TestBell:
    def test_published_anchors(self):
        assert bell_parameter(CH1, 14) == pytest.approx(2.361, abs=5e-4)
        assert abs(bell_parameter(CH1, 14) - 2.36) <= 0.03
        assert bell_parameter(CH2, 14) == pytest.approx(2.248, abs=5e-4)
        assert abs(bell_parameter(CH2, 14) - 2.24) <= 0.04

    def test_ideal(self):
        p = CH1.with_(v0=1.0)
        assert bell_parameter(p, 1) == pytest.approx(2 * math.sqrt(2))


class TestMaxModes:
    @staticmethod
    def brute(p, thr=2.0):
        m = 0
        while bell_parameter(p, m + 1) > thr:
            m += 1
            if m > 10**5:
                return UNBOUNDED
        return m

    def test_published_limits(self):
        assert max_modes(CH1) == 42 == self.brute(CH1)
        assert max_modes(CH2) == 26 == self.brute(CH2)

    def test_below_threshold_at_one_mode(self):
        assert max_modes(CH1.with_(v0=0.6)) == 0

    def test_unbounded(self):
        assert max_modes(CH1.with_(beta_ratio=0.0)) == UNBOUNDED

    @settings(max_examples=200)
    @given(channels(), st.floats(0.5, 2.8))
    def test_boundary_consistency(self, p, thr):
        m = max_modes(p, thr)
        if m == UNBOUNDED:
            assert multimode_zero(p)
            return
        assert isinstance(m, int)
        if m > 0:
            assert bell_parameter(p, m) > thr
        assert not bell_parameter(p, m + 1) > thr


def multimode_zero(p):
    return p.chi * p.xi_se * p.beta_ratio == 0


class TestSuppression:
    def test_ratio_only(self):
        assert noise_suppression_factor(CH1, CH2, "ratio_only") == pytest.approx(1.7, rel=1e-12)
        assert noise_suppression_factor(CH1, CH1) == 1.0

    def test_full_term(self):
        oracle = (1 / 0.167) / ((1 / 1.7) / 0.158)
        got = noise_suppression_factor(CH1, CH2, "full_term")
        assert got == pytest.approx(oracle, rel=1e-12)
        assert got == pytest.approx(1.61, abs=5e-3)

    def test_degenerate(self):
        with pytest.raises(DegenerateModelError):
            noise_suppression_factor(CH1.with_(beta_ratio=0.0), CH2)
        with pytest.raises(DegenerateModelError):
            noise_suppression_factor(CH1.with_(beta_ratio=0.0), CH2, "full_term")


class TestDecay:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            DecayModel(DecayKind.GAUSSIAN, None)
        with pytest.raises(InvalidArgumentError):
            DecayModel("exponential", -1.0)
        assert DecayModel("none").factor(1e9) == 1.0
        with pytest.raises(InvalidArgumentError):
            DecayModel("gaussian", 10).factor(-1)

    @pytest.mark.parametrize("kind", ["exponential", "gaussian", "none"])
    def test_t0_unchanged(self, kind):
        d = DecayModel(kind, 20.0)
        assert bell_vs_time(CH1, 14, d, 0.0) == bell_parameter(CH1, 14)

    @given(st.sampled_from(["exponential", "gaussian"]), st.floats(1, 100),
           st.floats(0, 200), st.floats(0, 200))
    def test_monotone(self, kind, tau, t1, t2):
        d = DecayModel(kind, tau)
        lo, hi = sorted((t1, t2))
        assert bell_vs_time(CH1, 14, d, hi) <= bell_vs_time(CH1, 14, d, lo)

    def test_decayed_gamma_at_25us_anchor(self):
        g = invert_gamma_for_bell(CH1, 14, 2.12)
        assert g == pytest.approx(0.066, abs=1e-3)
        tau = 25.0 / math.sqrt(-math.log(g / CH1.gamma))
        assert bell_vs_time(CH1, 14, DecayModel("gaussian", tau), 25.0) == pytest.approx(2.12, rel=1e-12)

    def test_fully_decayed_goes_to_zero(self):
        assert bell_vs_time(CH1, 14, DecayModel("gaussian", 1.0), 1e3) == 0.0


class TestInvertGamma:
    def test_ch1(self):
        g = invert_gamma_for_bell(CH1, 14, 2.12)
        assert g == pytest.approx(0.0664, abs=5e-5)
        assert bell_parameter(CH1.with_(gamma=g), 14) == pytest.approx(2.12, rel=1e-9)

    def test_ch2_roundtrip(self):
        g = invert_gamma_for_bell(CH2, 14, 2.06)
        assert bell_parameter(CH2.with_(gamma=g), 14) == pytest.approx(2.06, rel=1e-9)

    def test_single_mode(self):
        assert invert_gamma_for_bell(CH1, 1, S_MAX * CH1.v0) == CH1.gamma
        with pytest.raises(NoSolutionError):
            invert_gamma_for_bell(CH1, 1, 2.0)

    def test_out_of_range(self):
        with pytest.raises(NoSolutionError):
            invert_gamma_for_bell(CH1, 14, 2.7)
        with pytest.raises(NoSolutionError):
            invert_gamma_for_bell(CH1, 14, 0.0)
        with pytest.raises(NoSolutionError):
            invert_gamma_for_bell(CH1, 14, 2.5738)  # needs gamma > 1

    @given(st.sampled_from(["exponential", "gaussian"]), st.floats(5, 100), st.floats(0, 60))
    def test_roundtrip_with_decay(self, kind, tau, t):
        d = DecayModel(kind, tau)
        s = bell_vs_time(CH1, 14, d, t)
        if s < 1e-3:
            return
        g = invert_gamma_for_bell(CH1, 14, s)
        assert g == pytest.approx(CH1.gamma * d.factor(t), rel=1e-9)
