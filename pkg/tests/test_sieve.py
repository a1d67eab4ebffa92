"""Desk-scale oracle: exact counts against independent references (sympy
primality, mpmath sums), crossing point, pointwise verification."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from pntbounds.errors import AboveLimit
from pntbounds.sieve import (
    PrimeStore,
    buthe_envelope,
    crossing_anchor,
    crossing_point,
    envelope_decreasing_on_grid,
    verify_pointwise,
)
from pntbounds.xreal import DOWN, UP, Enclosure, format_decimal


class TestPrimeStore:
    def test_pi_against_sympy(self, small_store):
        for x in [10, 100, 1000, 10**6]:
            assert small_store.exact_counts(x)[0] == sympy.primepi(x)

    def test_primality_random_sample_vs_sympy(self, small_store):
        rng = random.Random(1)
        for _ in range(300):
            m = rng.randint(2, 10**6)
            assert small_store.is_prime(m) == sympy.isprime(m)

    def test_at_two(self, small_store):
        pi, theta, psi = small_store.exact_counts(2)
        assert pi == 1
        assert theta.contains(Enclosure.exact(2).log().lo)
        assert psi.contains(Enclosure.exact(2).log().lo)

    def test_at_crossing_x(self, small_store):
        pi, theta, _ = small_store.exact_counts(40.787732519)
        assert pi == 12
        ref = math.fsum(math.log(p) for p in sympy.primerange(2, 41))
        assert abs(float(theta.mid().mpfr) - ref) < 1e-12

    def test_theta_against_mpmath_sum(self, small_store):
        import mpmath

        with mpmath.workdps(45):
            x = 10**4
            ref = mpmath.fsum(mpmath.log(p) for p in sympy.primerange(2, x + 1))
            _, theta, _ = small_store.exact_counts(x)
            lo = mpmath.mpf(format_decimal(theta.lo, 35, DOWN))
            hi = mpmath.mpf(format_decimal(theta.hi, 35, UP))
            assert lo <= ref <= hi

    def test_enclosure_width(self, small_store):
        _, theta, _ = small_store.exact_counts(10**6)
        assert theta.rel_width() <= 2.0**-64

    def test_psi_prime_power_identity(self, small_store):
        # psi(x) - theta(x) = sum over k >= 2 of theta(x^(1/k))
        for x in [100, 10**4, 10**6]:
            _, theta, psi = small_store.exact_counts(x)
            gap = psi - theta
            acc = Enclosure.exact(0)
            k = 2
            while 2**k <= x:
                r = int(round(x ** (1.0 / k)))
                while (r + 1) ** k <= x:
                    r += 1
                while r**k > x:
                    r -= 1
                if r >= 2:
                    acc = acc + small_store.exact_counts(r)[1]
                k += 1
            assert gap.lo.mpfr <= acc.hi.mpfr and acc.lo.mpfr <= gap.hi.mpfr

    def test_theta_le_psi(self, small_store):
        for x in [10, 1000, 999983]:
            _, theta, psi = small_store.exact_counts(x)
            assert theta.lo.mpfr <= psi.hi.mpfr

    def test_checkpoints_match_rescan(self, small_store):
        # checkpointed theta at a segment boundary equals a from-scratch sum
        import mpmath

        with mpmath.workdps(45):
            x = (1 << 16) * 3
            _, theta, _ = small_store.exact_counts(x)
            ref = mpmath.fsum(mpmath.log(p) for p in sympy.primerange(2, x + 1))
            lo = mpmath.mpf(format_decimal(theta.lo, 35, DOWN))
            hi = mpmath.mpf(format_decimal(theta.hi, 35, UP))
            assert lo <= ref <= hi

    def test_above_limit(self, small_store):
        with pytest.raises(AboveLimit):
            small_store.exact_counts(10**6 + 10)

    def test_cache_round_trip(self, small_store, tmp_path):
        p = tmp_path / "ckpt.bin"
        small_store.save_checkpoints(p)
        loaded = PrimeStore.from_cache(p)
        for x in [2, 1000, 65536 * 2, 10**6]:
            a = small_store.exact_counts(x)
            b = loaded.exact_counts(x)
            assert a[0] == b[0]
            assert b[1].lo.mpfr <= a[1].lo.mpfr and a[1].hi.mpfr <= b[1].hi.mpfr


class TestCrossingPoint:
    def test_encloses_published_value(self):
        # published digits are a truncation: the root is 40.787732519...
        enc = crossing_point()
        assert float(enc.lo.mpfr) >= 40.787732519
        assert float(enc.hi.mpfr) < 40.787732520
        assert float(enc.width().mpfr) <= 1e-9

    def test_sign_change_brackets(self):
        from pntbounds.sieve import _crossing_gap_function

        assert _crossing_gap_function(Enclosure.from_decimal("40.7"), 192).lo.mpfr > 0
        assert _crossing_gap_function(Enclosure.from_decimal("40.9"), 192).hi.mpfr < 0

    def test_discrepancy_vanishes_at_midpoint(self):
        from pntbounds.sieve import _crossing_gap_function

        enc = crossing_point()
        mid = enc.mid()
        v = _crossing_gap_function(Enclosure.from_endpoints(mid, mid), 192)
        assert abs(float(v.mid().mpfr)) < 1e-12

    def test_anchor_is_oracle_verifiable(self, small_store):
        a = crossing_anchor()
        assert a.oracle_verifiable
        pi, theta, _ = small_store.exact_counts(float(Fraction(a.x0)))
        assert pi == a.pi_x0
        assert theta.lo.mpfr <= a.theta_x0.hi.mpfr


class TestVerifyPointwise:
    def test_huge_bound_never_violated(self, small_store):
        rep = verify_pointwise(small_store, "pi",
                               lambda logs: np.full_like(logs, 1e6), 10**6)
        assert rep.ok

    def test_zero_bound_violated_at_two(self, small_store):
        rep = verify_pointwise(small_store, "pi",
                               lambda logs: np.zeros_like(logs), 100)
        assert not rep.ok
        assert rep.violations[0][0] == 2

    def test_weak_coefficient_to_1e6(self, small_store):
        rep = verify_pointwise(small_store, "pi",
                               lambda logs: np.full_like(logs, 0.4298), 10**6)
        assert rep.ok
        assert abs(rep.max_ratio - math.log(2) / 2) < 1e-9

    def test_theta_and_psi_kinds(self, small_store):
        rep_t = verify_pointwise(small_store, "theta",
                                 lambda logs: np.full_like(logs, 1.0), 10**5)
        rep_p = verify_pointwise(small_store, "psi",
                                 lambda logs: np.full_like(logs, 1.2), 10**5)
        assert rep_t.ok and rep_p.ok

    def test_asymptotic_curve_soundness_desk_scale(self, small_store):
        # E_pi against the converted curve, evaluated well below its official
        # threshold as a small-threshold surrogate: the curve exceeds 0.4298
        # on this range, so the exact sup must stay under it
        from pntbounds.bounds import AsymptoticBound, eval_asymp

        bound = AsymptoticBound.make("pi", "121.107", Fraction(3, 2), 2)

        import warnings

        def curve(logs):
            out = np.empty_like(logs)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                for i, L in enumerate(logs):
                    out[i] = float(eval_asymp(
                        bound, Fraction(float(L)).limit_denominator(10**9)).lo.mpfr)
            return out

        # sample sparsely via the vectorised path on a modest range
        rep = verify_pointwise(small_store, "pi", curve, 5000)
        assert rep.ok


class TestButheEnvelope:
    def test_at_97(self):
        v = buthe_envelope(Enclosure.exact(97).log())
        assert float(v.mpfr) <= 0.4298
        assert format_decimal(v, 6, UP) == "3.79159e-01"

    def test_at_1e10(self):
        v = buthe_envelope(Enclosure.exact(10**10).log())
        assert format_decimal(v, 6, UP) == "2.15616e-05"

    def test_decreasing_small_grid(self):
        assert envelope_decreasing_on_grid(Enclosure.exact(97).log(), "43.75",
                                           nodes=200)

    def test_vanishes_at_infinity_direction(self):
        a = buthe_envelope(200)
        b = buthe_envelope(400)
        assert b.mpfr < a.mpfr


def test_crossing_gap_monotone_on_bracket():
    # scalar monotonicity of the gap function across (37, 41): unique root
    from pntbounds.sieve import _crossing_gap_function

    vals = [_crossing_gap_function(Enclosure.from_decimal(x), 192)
            for x in ["37.2", "38", "39", "40", "40.5", "40.9", "40.99"]]
    for a, b in zip(vals, vals[1:]):
        assert b.hi.mpfr < a.lo.mpfr


def test_alternative_bound_forms_desk_scale(big_store):
    # curve shapes from the alternative-form corollaries, verified pointwise
    # over every prime gap the sieve can reach:
    #   E_pi(x) <= 2 log(x) x^(-1/2)        (valid for 1 <= log x <= 57)
    #   E_pi(x) <= x^(-1/4)                 (valid for 1 <= log x <= 107.6)
    import numpy as np

    rep1 = verify_pointwise(
        big_store, "pi",
        lambda logs: np.where(logs >= 1.0, 2 * logs * np.exp(-logs / 2), np.inf),
        x_max=big_store.limit)
    assert rep1.ok
    rep2 = verify_pointwise(
        big_store, "pi",
        lambda logs: np.where(logs >= 1.0, np.exp(-logs / 4), np.inf),
        x_max=big_store.limit)
    assert rep2.ok


def test_pi_at_1e8_known_count(big_store):
    # independent recount reference for the full sieve range
    pi, theta, psi = big_store.exact_counts(10**8)
    assert pi == 5761455
    assert theta.rel_width() <= 2.0**-64
    assert psi.hi.mpfr >= theta.hi.mpfr


def test_theta_to_pi_curve_sound_over_all_gaps(big_store):
    # the converted pi curve (A=121.107, valid past its threshold; here used
    # as a desk-scale surrogate over [2, 1e8]) dominates the true normalised
    # error at every prime gap
    import numpy as np

    R, A, C = 5.5666305, 121.107, 2.0

    def curve(logs):
        t = np.maximum(logs, 1e-9) / R
        return A * t**1.5 * np.exp(-C * np.sqrt(t))

    rep = verify_pointwise(big_store, "pi", curve, x_max=big_store.limit)
    assert rep.ok
