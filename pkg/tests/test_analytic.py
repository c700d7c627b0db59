"""Closed-form constants and the Fourier-side quadrature integrals."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from deltachi.analytic import (
    QuadratureSpec,
    beta_g,
    beta_yomega,
    constant_bundle,
    i_lower,
    lambda_binom,
    lambda_gamma,
    lambda_integral,
    m2v_lower_check,
    plancherel_rhs,
    prime_sum_diag,
    script_L,
    tau_char,
    tau_star,
    thresholds,
    u_sequence,
    window_transform,
)
from deltachi.characters import character_by_index
from deltachi.delta import (
    IntegralKind,
    WeightFunction,
    WeightKind,
    build_profile,
    m_2V,
    m_star,
)
from deltachi.report import CheckStatus
from deltachi.sieve import (
    ClassWeights,
    MultiplicativeWeight,
    WeightFamily,
    build_spf,
)

from .oracles import raw_coeffs

TABLE = build_spf(20000)
UNIT = WeightFunction(WeightKind.UNIT)
MU = WeightFunction(WeightKind.MOEBIUS)
CHI4 = WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))
CHI5 = WeightFunction(WeightKind.CHARACTER, character_by_index(5, 1))


def _mode_tail_free_integral(profile, V):
    """Closed form V^2 int_{-1/V}^{1/V} |tau|^2: per-mode sine kernels."""
    c = raw_coeffs(profile)
    w = np.outer(c, c.conj())
    s = profile.logs[:, None] - profile.logs[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        kern = np.where(s == 0, 2.0 / V, 2.0 * np.sin(np.abs(s) / V) / np.abs(s))
    return V * V * float(np.sum(w.real * kern))


class TestLambda:
    def test_value_at_one(self):
        assert abs(lambda_gamma(1) - 2.0) < 1e-12

    def test_small_integers(self):
        assert abs(lambda_gamma(2) - 6.0) < 1e-11
        assert abs(lambda_gamma(3) - 20.0) < 1e-10

    @pytest.mark.parametrize("t", range(1, 13))
    def test_gamma_matches_central_binomial(self, t):
        exact = lambda_binom(t)
        assert exact == math.comb(2 * t, t)
        assert abs(lambda_gamma(t) - exact) < 1e-10 * exact

    @pytest.mark.parametrize("t", range(1, 9))
    def test_integral_route(self, t):
        exact = lambda_binom(t)
        assert abs(lambda_integral(t) - exact) < 1e-7 * exact

    @pytest.mark.parametrize("t", [1.0, 1.5, 2.0, 2.5, 3.0, 5.0])
    def test_integral_matches_gamma_off_integers(self, t):
        # 10x the default panel tolerance.
        assert abs(lambda_integral(t) - lambda_gamma(t)) < 1e-7 * lambda_gamma(t)

    def test_half_integer_against_gamma_reference(self):
        ref = float(
            mpmath.mpf(8) * mpmath.gamma(2) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(2.5))
        )
        assert abs(lambda_gamma(1.5) - ref) < 1e-12 * ref

    @pytest.mark.parametrize("t", [1.0001, 1.5, 2.0, 3.0, 4.5, 6.0])
    def test_strictly_below_dyadic_envelope(self, t):
        assert lambda_gamma(t) < 2 ** (2 * t - 1)

    def test_envelope_equality_at_one(self):
        assert abs(lambda_gamma(1.0) - 2 ** (2 * 1.0 - 1)) < 1e-12

    def test_known_large_value(self):
        assert lambda_binom(6) == 924

    def test_validation(self):
        with pytest.raises(ValueError):
            lambda_gamma(0.5)
        with pytest.raises(ValueError):
            lambda_binom(0)
        with pytest.raises(ValueError):
            lambda_integral(0.2)


class TestBeta:
    def test_uniform_below_order(self):
        assert beta_yomega(5, 2, 1) == Fraction(3, 4)

    def test_uniform_wrapped(self):
        # r = 2, t = 2: the k - j even pairs contribute 8 of the 16.
        assert beta_yomega(2, 2, 1) == Fraction(1)
        assert beta_yomega(2, 3, 1) == Fraction(1)

    @pytest.mark.parametrize("r", range(3, 9))
    def test_reduces_to_lambda_below_order(self, r):
        for t in range(1, r):
            for y in (Fraction(1, 2), 1, 3):
                want = Fraction(y) * math.comb(2 * t, t) / 2 ** (2 * t - 1)
                assert beta_yomega(r, t, y) == want

    @pytest.mark.parametrize("r,t,y", [(3, 2, 1), (5, 3, 2), (8, 4, Fraction(1, 2))])
    def test_class_weight_route_agrees(self, r, t, y):
        z = tuple(float(Fraction(y) / r) for _ in range(r))
        got = beta_g(ClassWeights(r, z), t)
        assert abs(got - float(beta_yomega(r, t, y))) < 1e-12 * max(1.0, got)

    def test_bounded_by_twice_density(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            r = int(rng.integers(2, 9))
            z = rng.random(r)
            w = ClassWeights(r, tuple(float(v) for v in z))
            for t in (1, 2, 3.5):
                b = beta_g(w, t)
                assert -1e-12 <= b <= 2 * w.y + 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            beta_yomega(1, 2, 1)
        with pytest.raises(ValueError):
            beta_yomega(4, 0, 1)
        with pytest.raises(ValueError):
            beta_g(ClassWeights(2, (0.5, 0.5)), 0.5)


class TestThresholds:
    def test_at_one_both_unity(self):
        y0, y1 = thresholds(1)
        assert abs(y0 - 1.0) < 1e-12
        assert abs(y1 - 1.0) < 1e-12

    def test_at_two(self):
        y0, y1 = thresholds(2)
        assert y0 == pytest.approx(2 / 7, rel=1e-15)
        assert y1 == pytest.approx(2 / 5, rel=1e-11)

    def test_ordering(self):
        # lambda < 2^(2t-1) for t > 1 forces y0 < y1.
        for t in (1.5, 2, 3, 5):
            y0, y1 = thresholds(t)
            assert y0 < y1


class TestScriptL:
    def test_triple_exponential_point(self):
        x = math.exp(math.exp(math.e))
        assert script_L(x) == pytest.approx(math.exp(math.sqrt(math.e)), rel=1e-12)

    def test_double_exponential_point(self):
        # log x = e^4, so the iterated logs are 4 and log 4.
        x = math.exp(math.exp(4.0))
        assert script_L(x) == pytest.approx(
            math.exp(math.sqrt(4.0 * math.log(4.0))), rel=1e-12
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            script_L(15.9)


class TestUSequence:
    def test_first_values(self):
        assert u_sequence(3) == [
            Fraction(2),
            Fraction(4, 3),
            Fraction(8, 7),
            Fraction(16, 15),
        ]

    def test_closed_form_and_bound(self):
        us = u_sequence(30)
        assert len(us) == 31
        for k, u in enumerate(us):
            assert isinstance(u, Fraction)
            assert u == Fraction(2 ** (k + 1), 2 ** (k + 1) - 1)
            assert u <= 1 + Fraction(1, 2**k)

    def test_validation(self):
        with pytest.raises(ValueError):
            u_sequence(-1)


class TestTauChar:
    def test_twelve_quartic_vanishes(self):
        p = build_profile(12, CHI4, TABLE)
        assert abs(tau_char(p, 0.0)) < 1e-15

    def test_theta_zero_is_coefficient_sum(self):
        for n, f in [(30, MU), (12, UNIT), (60, CHI5)]:
            p = build_profile(n, f, TABLE)
            want = complex(np.sum(raw_coeffs(p)))
            assert tau_char(p, 0.0) == pytest.approx(want, abs=1e-12)

    def test_trivial_profile(self):
        p = build_profile(1, UNIT, TABLE)
        for th in (0.0, 1.0, -3.7):
            assert tau_char(p, th) == pytest.approx(1.0 + 0.0j, abs=1e-15)

    def test_real_weights_conjugate_symmetry(self):
        for n, f in [(30, MU), (240, UNIT)]:
            p = build_profile(n, f, TABLE)
            for th in (0.3, 1.7, 5.0):
                assert tau_char(p, -th) == pytest.approx(
                    tau_char(p, th).conjugate(), abs=1e-12
                )

    def test_direct_sum_oracle(self):
        p = build_profile(360, CHI5, TABLE)
        c = raw_coeffs(p)
        for th in np.linspace(-4.0, 4.0, 9):
            want = complex(np.sum(c * np.exp(1j * th * p.logs)))
            assert tau_char(p, float(th)) == pytest.approx(want, abs=1e-12)


class TestWindowTransform:
    def test_zero_theta_sinc_limit(self):
        for n, f, v in [(12, CHI4, 1.0), (30, MU, 2.5)]:
            p = build_profile(n, f, TABLE)
            assert window_transform(p, v, 0.0) == pytest.approx(
                v * tau_char(p, 0.0), abs=1e-12
            )

    def test_unit_profile_at_pi(self):
        p = build_profile(1, UNIT, TABLE)
        assert window_transform(p, 1.0, math.pi) == pytest.approx(
            2j / math.pi, abs=1e-12
        )

    def test_modulus_factorization(self):
        p = build_profile(36, CHI5, TABLE)
        v = 1.5
        for th in (0.4, 2.0, 9.3):
            got = abs(window_transform(p, v, th))
            want = abs(tau_char(p, -th)) * abs(2.0 * math.sin(v * th / 2.0) / th)
            assert got == pytest.approx(want, abs=1e-12)

    def test_square_integral_recovers_window_moment(self):
        # Parseval at loose tolerance: trapezoid on [-T, T] plus the
        # crude 4 mass / (pi T) tail allowance.
        p = build_profile(12, CHI4, TABLE)
        v = 1.0
        c = raw_coeffs(p)
        logs = p.logs
        T = 20000.0
        th = np.linspace(1e-9, T, 4_000_000)
        tau_m = np.exp(-1j * np.outer(th, logs)) @ c
        win = np.abs(2.0 * np.sin(v * th / 2.0) / th) ** 2
        half = np.trapezoid(np.abs(tau_m) ** 2 * win, th)
        tau_p = np.exp(1j * np.outer(th, logs)) @ c
        other = np.trapezoid(np.abs(tau_p) ** 2 * win, th)
        total = (half + other) / (2.0 * math.pi)
        mass = float(np.sum(np.abs(c))) ** 2
        tail = 4.0 * mass / (math.pi * T)
        want = m_star(p, 2, v).value
        assert abs(total - want) <= tail + 5e-3

    def test_validation(self):
        p = build_profile(6, UNIT, TABLE)
        with pytest.raises(ValueError):
            window_transform(p, 0.0, 1.0)


class TestTauStar:
    @pytest.mark.parametrize("v", [1.0, 2.0, 3.5])
    def test_trivial_profile_half_poisson_mass(self, v):
        p = build_profile(1, UNIT, TABLE)
        r = tau_star(p, v)
        assert r.kind is IntegralKind.TAU_STAR
        assert not r.exact
        assert abs(r.value - v * math.pi / 2.0) <= r.error_bound
        assert r.error_bound < 1e-6

    def test_two_divisors_in_phase(self):
        p = build_profile(2, UNIT, TABLE)
        r = tau_star(p, 1.0)
        assert abs(r.value - 1.5 * math.pi) <= r.error_bound

    @pytest.mark.parametrize("n,f", [(6, UNIT), (30, MU), (360, UNIT)])
    @pytest.mark.parametrize("v", [1.0, 2.0])
    def test_real_weight_exponential_closed_form(self, n, f, v):
        # Real coefficients leave only cosine modes, and the Poisson
        # kernel integrates them to (pi v / 2) e^(-s / v).
        p = build_profile(n, f, TABLE)
        c = raw_coeffs(p)
        w = np.outer(c, c.conj()).real
        s = np.abs(p.logs[:, None] - p.logs[None, :])
        want = 0.5 * math.pi * v * float(np.sum(w * np.exp(-s / v)))
        r = tau_star(p, v)
        assert abs(r.value - want) <= r.error_bound + 1e-10 * abs(want)

    def test_complex_phase_against_oscillatory_reference(self):
        # chi mod 5 of order 4 gives chi(2) = i, so |tau|^2 carries a
        # genuine sine mode: 2 - 2 sin(theta log 2).
        p = build_profile(2, CHI5, TABLE)
        a = math.log(2.0)
        i_sin = mpmath.quadosc(
            lambda u: mpmath.sin(a * u) / (1 + u * u),
            [0, mpmath.inf],
            period=2 * mpmath.pi / a,
        )
        want = math.pi - 2.0 * float(i_sin)
        r = tau_star(p, 1.0)
        assert abs(r.value - want) <= r.error_bound + 1e-9

    def test_tail_cut_override_still_covered(self):
        p = build_profile(1, UNIT, TABLE)
        r = tau_star(p, 1.0, QuadratureSpec(tail_cut=64.0))
        assert abs(r.value - math.pi / 2.0) <= r.error_bound

    def test_validation(self):
        p = build_profile(6, UNIT, TABLE)
        with pytest.raises(ValueError):
            tau_star(p, 0.5)


class TestPlancherel:
    @pytest.mark.parametrize("V", [1.0, 2.0, 5.0])
    def test_trivial_profile_quadratic(self, V):
        p = build_profile(1, UNIT, TABLE)
        r = plancherel_rhs(p, V)
        assert r.kind is IntegralKind.PLANCHEREL_RHS
        assert abs(r.value - V * V / 2.0) <= r.error_bound

    @pytest.mark.parametrize("n", [2, 12, 30, 97, 360, 1001, 5040])
    @pytest.mark.parametrize("fname", ["chi4", "chi5", "mu"])
    @pytest.mark.parametrize("V", [1.0, 2.0, 5.0])
    def test_matches_exact_window_integral(self, n, fname, V):
        f = {"chi4": CHI4, "chi5": CHI5, "mu": MU}[fname]
        p = build_profile(n, f, TABLE)
        r = plancherel_rhs(p, V)
        want = m_2V(p, V).value
        assert abs(r.value - want) <= r.error_bound
        assert abs(r.value - want) <= max(1e-6 * abs(want), 1e-9)

    def test_error_bound_positive(self):
        p = build_profile(30, MU, TABLE)
        r = plancherel_rhs(p, 2.0)
        assert r.error_bound > 0
        assert not r.exact

    def test_validation(self):
        p = build_profile(6, UNIT, TABLE)
        with pytest.raises(ValueError):
            plancherel_rhs(p, 0.0)


class TestILower:
    @pytest.mark.parametrize("V", [0.5, 1.0, 3.0])
    def test_trivial_profile_linear(self, V):
        p = build_profile(1, UNIT, TABLE)
        r = i_lower(p, V)
        assert r.kind is IntegralKind.I_LOWER
        assert abs(r.value - 2.0 * V) <= r.error_bound + 1e-12

    def test_five_with_quartic_character(self):
        p = build_profile(5, CHI4, TABLE)
        want = 4.0 + 4.0 * math.sin(math.log(5.0)) / math.log(5.0)
        r = i_lower(p, 1.0)
        assert abs(r.value - want) <= r.error_bound + 1e-12

    @pytest.mark.parametrize("n", [2, 12, 30, 5040])
    @pytest.mark.parametrize("fname", ["chi4", "chi5", "mu", "unit"])
    @pytest.mark.parametrize("V", [0.5, 1.0, 3.0])
    def test_per_mode_closed_form(self, n, fname, V):
        f = {"chi4": CHI4, "chi5": CHI5, "mu": MU, "unit": UNIT}[fname]
        p = build_profile(n, f, TABLE)
        r = i_lower(p, V)
        want = _mode_tail_free_integral(p, V)
        assert abs(r.value - want) <= r.error_bound + 1e-9 * max(1.0, abs(want))

    def test_validation(self):
        p = build_profile(6, UNIT, TABLE)
        with pytest.raises(ValueError):
            i_lower(p, -1.0)


class TestM2vLower:
    def test_trivial_profile_constant(self):
        p = build_profile(1, UNIT, TABLE)
        entry = m2v_lower_check(p, 1.0)
        assert entry.status is CheckStatus.PASS
        assert entry.lhs == pytest.approx(59.0 / 180.0, abs=1e-9)
        assert entry.rhs == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 12, 30, 360, 1001])
    @pytest.mark.parametrize("fname", ["chi4", "chi5", "mu"])
    @pytest.mark.parametrize("V", [1.0, 2.0, 5.0])
    def test_corpus_never_fails(self, n, fname, V):
        f = {"chi4": CHI4, "chi5": CHI5, "mu": MU}[fname]
        p = build_profile(n, f, TABLE)
        assert m2v_lower_check(p, V).status is CheckStatus.PASS

    def test_fejer_spike_counterexample(self):
        # The claim drops the V/pi factor of the window integral
        # identity, so it can fail for V < pi.  n = 10^4 is extremal:
        # under the mod-4 character only the five 5-power divisors
        # survive, the transform is a Fejer spike, and the truncated
        # integral outweighs the exact one.  Restoring V/pi repairs it.
        p = build_profile(10**4, CHI4, TABLE)
        entry = m2v_lower_check(p, 1.0)
        assert entry.status is CheckStatus.FAIL
        assert entry.rhs == pytest.approx(2.5, abs=1e-12)
        assert entry.lhs == pytest.approx(3.004043, abs=1e-5)
        assert entry.lhs * 1.0 / math.pi <= entry.rhs

    def test_validation(self):
        p = build_profile(6, UNIT, TABLE)
        with pytest.raises(ValueError):
            m2v_lower_check(p, 0.0)


class TestPrimeSumDiag:
    def test_quartic_character_frozen_sum(self):
        chi = character_by_index(4, 1)
        g = MultiplicativeWeight(WeightFamily.UNIT)
        lhs, main = prime_sum_diag(chi, g, 1, 0.0, 20, TABLE)
        want = 4.0 * (1.0 / 5.0 + 1.0 / 13.0 + 1.0 / 17.0)
        assert lhs == pytest.approx(want, rel=1e-12)
        assert math.isfinite(main)

    def test_nonzero_twist_runs(self):
        chi = character_by_index(4, 1)
        g = MultiplicativeWeight(WeightFamily.MU2_Y_OMEGA, y=1.0)
        lhs, main = prime_sum_diag(chi, g, 2, 0.5, 500, TABLE)
        assert lhs > 0
        assert math.isfinite(main)

    def test_validation(self):
        chi = character_by_index(4, 1)
        g = MultiplicativeWeight(WeightFamily.UNIT)
        with pytest.raises(ValueError):
            prime_sum_diag(chi, g, 1, 1.5, 100, TABLE)
        with pytest.raises(ValueError):
            prime_sum_diag(chi, g, 0.5, 0.0, 100, TABLE)


class TestConstantBundle:
    def test_plain_fields(self):
        b = constant_bundle(2)
        assert b.t == 2
        assert b.lam == pytest.approx(6.0, abs=1e-10)
        assert b.y0 == pytest.approx(2 / 7, rel=1e-14)
        assert b.y1 == pytest.approx(2 / 5, rel=1e-10)
        assert b.betag is None
        assert b.script_l is None

    def test_optional_fields(self):
        w = ClassWeights(4, (0.25, 0.25, 0.25, 0.25))
        b = constant_bundle(3, weights=w, x=1e6)
        assert b.betag == pytest.approx(beta_g(w, 3), abs=1e-14)
        assert b.script_l == pytest.approx(script_L(1e6), rel=1e-14)

    def test_threshold_consistency(self):
        b = constant_bundle(2.5)
        assert b.y1 == pytest.approx(2.5 / (b.lam - 1.0), rel=1e-14)
