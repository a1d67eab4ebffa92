"""Directed arithmetic core: soundness of rounding directions, enclosure
containment against an independent oracle (mpmath), formatting."""

import random
from fractions import Fraction

import mpmath
import pytest

from pntbounds.errors import DomainError, PrecisionExhausted
from pntbounds.xreal import (
    DOWN,
    EXACT,
    UP,
    Enclosure,
    XReal,
    format_decimal,
    get_precision,
    set_precision,
    working_precision,
    xr_arith,
)

mpmath.mp.dps = 80


@pytest.fixture(autouse=True)
def _oracle_precision():
    # other test modules may lower the global mpmath precision
    with mpmath.workdps(80):
        yield


def mpf_of(x: XReal):
    return mpmath.mpf(format_decimal(x, 60, UP)) if x.sign else mpmath.mpf(0)


def test_directional_soundness_random_ops():
    rng = random.Random(20240211)
    for _ in range(300):
        a = Fraction(rng.randint(1, 10**12), rng.randint(1, 10**12))
        b = Fraction(rng.randint(1, 10**12), rng.randint(1, 10**12))
        op = rng.choice(["add", "sub", "mul", "div"])
        xa, xb = XReal.from_fraction(a, DOWN), XReal.from_fraction(b, DOWN)
        hi = xr_arith(op, [xa, xb], UP, 64)
        lo = xr_arith(op, [xa, xb], DOWN, 64)
        assert lo.mpfr <= hi.mpfr
        mid = xr_arith(op, [xa, xb], UP, 192)
        assert lo.mpfr <= mid.mpfr <= hi.mpfr


def test_directional_soundness_transcendental():
    rng = random.Random(7)
    for _ in range(100):
        a = Fraction(rng.randint(1, 10**9), rng.randint(1, 10**6))
        xa = XReal.from_fraction(a, DOWN)
        for op in ["exp", "log", "sqrt"]:
            hi = xr_arith(op, [xa], UP, 64)
            lo = xr_arith(op, [xa], DOWN, 64)
            assert lo.mpfr <= hi.mpfr
            ref = xr_arith(op, [xa], DOWN, 256)
            assert lo.mpfr <= ref.mpfr <= hi.mpfr


def test_exp_log_inverse_pair():
    e = Enclosure.exact(2).log(64).exp(64)
    assert e.contains(XReal.from_int(2))
    assert e.rel_width() <= 2.0**-60


def test_sqrt_zero_exact():
    r = xr_arith("sqrt", [XReal.from_int(0)], UP)
    assert r.sign == 0 and r.tag == EXACT


def test_log_space_inputs_carried_exactly():
    # huge x enters as its log; no exp/log round trip happens
    L = Enclosure.exact(100000)
    assert L.lo == L.hi and L.lo.tag == EXACT
    assert float(L.lo.mpfr) == 100000.0


def test_enclosure_against_mpmath():
    rng = random.Random(99)
    for _ in range(120):
        a = Fraction(rng.randint(1, 10**9), rng.randint(1, 10**9))
        b = Fraction(rng.randint(1, 10**9), rng.randint(1, 10**9))
        ea, eb = Enclosure.exact(a), Enclosure.exact(b)
        ra, rb = mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator
        checks = [
            (ea + eb, ra + rb),
            (ea - eb, ra - rb),
            (ea * eb, ra * rb),
            (ea / eb, ra / rb),
            (ea.exp(), mpmath.exp(ra)),
            (ea.log(), mpmath.log(ra)),
            (ea.sqrt(), mpmath.sqrt(ra)),
            (ea.pow(Fraction(3, 2)), ra ** mpmath.mpf(1.5)),
        ]
        for enc, ref in checks:
            lo, hi = mpf_of(enc.lo), mpf_of(enc.hi)
            assert lo <= ref <= hi


def test_mantissa_exponent_fields():
    x = XReal.from_fraction(Fraction(3, 4), UP)
    assert x.sign == 1
    assert Fraction(1) <= x.mantissa < Fraction(2)
    assert x.log2_exponent == -1
    big = Enclosure.exact(10).log().exp((None))  # round trip keeps scale
    assert abs(big.hi.log2_exponent - 3) <= 1


def test_extreme_exponent_range():
    # values near e^(1e7) and 1e-(1e7) stay representable
    tiny = Enclosure.exact(-10_000_000).exp()
    huge = Enclosure.exact(10_000_000).exp()
    assert tiny.lo.sign == 1 and huge.hi.sign == 1
    assert huge.hi.log2_exponent == pytest.approx(14_426_950, rel=1e-5)
    with pytest.raises(PrecisionExhausted):
        Enclosure.exact(2**60).exp()


def test_division_by_zero_enclosure():
    z = Enclosure.from_endpoints(-1, 1)
    with pytest.raises(DomainError):
        Enclosure.exact(1) / z
    with pytest.raises(DomainError):
        xr_arith("div", [XReal.from_int(1), XReal.from_int(0)], UP)
    with pytest.raises(DomainError):
        xr_arith("log", [XReal.from_int(-3)], UP)


def test_format_decimal_directed():
    third = Enclosure.exact(Fraction(1, 3))
    up = format_decimal(third.hi, 6, UP)
    down = format_decimal(third.lo, 6, DOWN)
    assert up == "3.33334e-01"
    assert down == "3.33333e-01"
    assert format_decimal(XReal.from_int(-1) , 3, UP) == "-1.00e+00"
    # carry at the digit boundary
    v = Enclosure.exact(Fraction(999999999, 10**9))
    assert format_decimal(v.hi, 3, UP) == "1.00e+00"


def test_precision_context():
    base = get_precision()
    with working_precision(base + 64):
        assert get_precision() == base + 64
    assert get_precision() == base
    with pytest.raises(PrecisionExhausted):
        set_precision(2**20)


def test_xr_arith_with_enclosure_args():
    e = Enclosure.from_decimal("2.5")
    up = xr_arith("mul", [e, e], UP)
    down = xr_arith("mul", [e, e], DOWN)
    assert down.mpfr <= 6.25 <= up.mpfr
