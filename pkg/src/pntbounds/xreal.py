"""Directed-rounding extended-exponent reals and enclosures.

Endpoint arithmetic is delegated to MPFR (through gmpy2), whose primitive
operations (+ - * / sqrt exp log pow) are correctly rounded in the rounding
direction of the active context.  An ``XReal`` is one MPFR value plus a tag
recording which way it was rounded; an ``Enclosure`` is a pair of endpoints
(down-rounded lo, up-rounded hi) guaranteed to bracket the true value.

The exponent range is configured far beyond the +-10**8 binary exponents the
tables require (values down to ~1e-3700 and up to e**(1e8) are routine), so
aside from a genuine overflow guard there is no special "log-space" carrier:
quantities like e**100000 are ordinary values here.
"""

from __future__ import annotations

import os
from fractions import Fraction

import gmpy2

from .errors import DomainError, PrecisionExhausted

UP = "up"
DOWN = "down"
EXACT = "exact"

# Binary exponents this far out still leave the spec's +-1e8 range a large margin.
_EXP_LIMIT = 1 << 44

_DEFAULT_PRECISION = int(os.environ.get("PNTBOUNDS_PRECISION", "192"))
_MAX_PRECISION = 4096


def get_precision() -> int:
    return _DEFAULT_PRECISION


def set_precision(bits: int) -> None:
    global _DEFAULT_PRECISION
    if not 16 <= bits <= _MAX_PRECISION:
        raise PrecisionExhausted(f"precision {bits} outside [16, {_MAX_PRECISION}]")
    _DEFAULT_PRECISION = bits


class working_precision:
    """Temporarily raise the default precision (series with cancellation)."""

    def __init__(self, bits: int):
        self.bits = min(bits, _MAX_PRECISION)

    def __enter__(self):
        self.saved = get_precision()
        set_precision(max(self.bits, self.saved))
        return self

    def __exit__(self, *exc):
        set_precision(self.saved)
        return False


_CTX_CACHE: dict[tuple[int, str], "gmpy2.context"] = {}


def _ctx(prec: int | None, direction: str):
    prec = prec or _DEFAULT_PRECISION
    key = (prec, direction)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = gmpy2.context(
            precision=prec,
            round=gmpy2.RoundUp if direction == UP else gmpy2.RoundDown,
            emin=-_EXP_LIMIT,
            emax=_EXP_LIMIT,
        )
        _CTX_CACHE[key] = ctx
    return ctx


def _guard(value, what="result"):
    if not gmpy2.is_finite(value):
        raise PrecisionExhausted(f"{what} left the representable exponent range")
    return value


class XReal:
    """A sign/mantissa/exponent real tagged with its rounding direction.

    Invariants: a value tagged ``up`` is >= the true quantity it stands for,
    one tagged ``down`` is <= it, and ``exact`` means no rounding occurred.
    """

    __slots__ = ("mpfr", "tag")

    def __init__(self, value, tag: str):
        self.mpfr = value
        self.tag = tag

    # -- constructors -------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "XReal":
        bits = max(2, n.bit_length() + 1)
        return cls(gmpy2.mpfr(n, bits), EXACT)

    @classmethod
    def from_fraction(cls, q, direction: str, prec: int | None = None) -> "XReal":
        q = Fraction(q)
        if q.denominator == 1:
            return cls.from_int(q.numerator)
        ctx = _ctx(prec, direction)
        num = gmpy2.mpfr(q.numerator, max(2, q.numerator.bit_length() + 1))
        den = gmpy2.mpfr(q.denominator, max(2, q.denominator.bit_length() + 1))
        ctx.clear_flags()
        r = _guard(ctx.div(num, den))
        # Power-of-two denominators divide exactly; the flag tells us.
        tag = EXACT if not ctx.inexact else direction
        return cls(r, tag)

    @classmethod
    def from_decimal(cls, text: str, direction: str, prec: int | None = None) -> "XReal":
        """Parse a decimal string, rounding in the requested direction."""
        mant, _, exppart = text.lower().partition("e")
        exp10 = int(exppart) if exppart else 0
        if "." in mant:
            intpart, fracpart = mant.split(".")
            exp10 -= len(fracpart)
            mant = intpart + fracpart
        n = int(mant)
        q = Fraction(n) * Fraction(10) ** exp10
        return cls.from_fraction(q, direction, prec)

    @classmethod
    def zero(cls) -> "XReal":
        return cls.from_int(0)

    # -- spec fields ---------------------------------------------------

    @property
    def sign(self) -> int:
        return int(gmpy2.sign(self.mpfr))

    @property
    def mantissa(self) -> Fraction:
        """Mantissa as an exact fraction in [1, 2) (0 for zero)."""
        if self.sign == 0:
            return Fraction(0)
        m, _ = self.mpfr.as_mantissa_exp()
        m = abs(int(m))
        return Fraction(m, 1 << (m.bit_length() - 1))

    @property
    def log2_exponent(self) -> int:
        if self.sign == 0:
            return 0
        m, e = self.mpfr.as_mantissa_exp()
        return int(e) + abs(int(m)).bit_length() - 1

    # -- conversions ----------------------------------------------------

    def __float__(self) -> float:
        return float(self.mpfr)

    def as_fraction(self) -> Fraction:
        m, e = self.mpfr.as_mantissa_exp()
        m, e = int(m), int(e)
        return Fraction(m) * (Fraction(2) ** e)

    def decimal(self, sigdigits: int = 20) -> str:
        """Decimal rendering rounded in this value's own safe direction."""
        direction = UP if self.tag == UP else DOWN if self.tag == DOWN else UP
        return format_decimal(self, sigdigits, direction)

    def __repr__(self) -> str:
        return f"XReal({format_decimal(self, 20, UP if self.tag != DOWN else DOWN)!s}, {self.tag})"

    # -- comparisons (exact across precisions) --------------------------

    def __eq__(self, other):
        return isinstance(other, XReal) and self.mpfr == other.mpfr

    def __lt__(self, other):
        return self.mpfr < (other.mpfr if isinstance(other, XReal) else other)

    def __le__(self, other):
        return self.mpfr <= (other.mpfr if isinstance(other, XReal) else other)

    def __gt__(self, other):
        return self.mpfr > (other.mpfr if isinstance(other, XReal) else other)

    def __ge__(self, other):
        return self.mpfr >= (other.mpfr if isinstance(other, XReal) else other)

    def __hash__(self):
        return hash(self.mpfr)


def _coerce(x) -> "gmpy2.mpfr":
    if isinstance(x, XReal):
        return x.mpfr
    if isinstance(x, int):
        return gmpy2.mpfr(x, max(2, x.bit_length() + 1))
    if isinstance(x, Fraction):
        raise TypeError("pass Fractions through XReal.from_fraction with a direction")
    return x


def _is_exact_op(args) -> bool:
    return all(a.tag == EXACT for a in args if isinstance(a, XReal))


def xr_arith(op: str, args, direction: str, precision: int | None = None) -> XReal:
    """Directed scalar arithmetic: one correctly rounded MPFR operation.

    ``op`` is one of add, sub, mul, div, pow, exp, log, sqrt, neg.  Enclosure
    arguments are propagated endpoint-correctly through the interval
    operation, and the endpoint matching ``direction`` is returned.
    """
    if any(isinstance(a, Enclosure) for a in args):
        encs = [a if isinstance(a, Enclosure) else Enclosure.exact(a) for a in args]
        if op == "add":
            r = encs[0] + encs[1]
        elif op == "sub":
            r = encs[0] - encs[1]
        elif op == "mul":
            r = encs[0] * encs[1]
        elif op == "div":
            r = encs[0] / encs[1]
        elif op == "pow":
            r = encs[0].pow(encs[1], precision)
        elif op == "exp":
            r = encs[0].exp(precision)
        elif op == "log":
            r = encs[0].log(precision)
        elif op == "sqrt":
            r = encs[0].sqrt(precision)
        elif op == "neg":
            r = -encs[0]
        else:
            raise ValueError(f"unknown op {op!r}")
        return r.hi if direction == UP else r.lo
    ctx = _ctx(precision, direction)
    vals = [_coerce(a) for a in args]
    ctx.clear_flags()
    if op == "add":
        r = ctx.add(*vals)
    elif op == "sub":
        r = ctx.sub(*vals)
    elif op == "mul":
        r = ctx.mul(*vals)
    elif op == "div":
        if gmpy2.is_zero(vals[1]):
            raise DomainError("division by zero")
        r = ctx.div(*vals)
    elif op == "pow":
        if vals[0] < 0:
            raise DomainError("pow of negative base")
        r = ctx.pow(*vals)
    elif op == "exp":
        r = ctx.exp(vals[0])
    elif op == "log":
        if vals[0] <= 0:
            raise DomainError("log of non-positive value")
        r = ctx.log(vals[0])
    elif op == "sqrt":
        if vals[0] < 0:
            raise DomainError("sqrt of negative value")
        r = ctx.sqrt(vals[0])
    elif op == "neg":
        r = ctx.minus(vals[0])
    else:
        raise ValueError(f"unknown op {op!r}")
    _guard(r, op)
    tag = EXACT if (not ctx.inexact and _is_exact_op(args)) else direction
    return XReal(r, tag)


def _mk(v, direction):
    return XReal(_guard(v), direction)


class Enclosure:
    """A certified interval [lo, hi] containing the true value."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: XReal, hi: XReal):
        if lo.mpfr > hi.mpfr:
            raise ValueError("enclosure endpoints out of order")
        self.lo = lo
        self.hi = hi

    # -- constructors --------------------------------------------------

    @classmethod
    def exact(cls, x) -> "Enclosure":
        if isinstance(x, XReal):
            return cls(x, x)
        if isinstance(x, int):
            v = XReal.from_int(x)
            return cls(v, v)
        if isinstance(x, Fraction):
            return cls(XReal.from_fraction(x, DOWN), XReal.from_fraction(x, UP))
        raise TypeError(f"cannot build enclosure from {type(x)}")

    @classmethod
    def from_decimal(cls, text: str, prec: int | None = None) -> "Enclosure":
        return cls(XReal.from_decimal(text, DOWN, prec), XReal.from_decimal(text, UP, prec))

    @classmethod
    def from_endpoints(cls, lo, hi) -> "Enclosure":
        lo = lo if isinstance(lo, XReal) else XReal.from_int(lo)
        hi = hi if isinstance(hi, XReal) else XReal.from_int(hi)
        return cls(XReal(lo.mpfr, DOWN), XReal(hi.mpfr, UP))

    # -- queries ---------------------------------------------------------

    def contains(self, x) -> bool:
        v = x.mpfr if isinstance(x, XReal) else x
        return self.lo.mpfr <= v <= self.hi.mpfr

    def straddles_zero(self) -> bool:
        return self.lo.mpfr <= 0 <= self.hi.mpfr

    def width(self, prec=None) -> XReal:
        return xr_arith("sub", [self.hi, self.lo], UP, prec)

    def rel_width(self, prec=None) -> float:
        if self.straddles_zero():
            return float("inf") if self.lo.mpfr != self.hi.mpfr else 0.0
        w = self.width(prec)
        scale = abs(self.lo.mpfr) if abs(self.lo.mpfr) < abs(self.hi.mpfr) else abs(self.hi.mpfr)
        q = _ctx(prec, UP).div(w.mpfr, scale)
        return float(q)

    def mid(self, prec=None) -> XReal:
        ctx = _ctx(prec, UP)
        return XReal(ctx.div(ctx.add(self.lo.mpfr, self.hi.mpfr), 2), UP)

    def __repr__(self):
        return f"Enclosure[{format_decimal(self.lo, 20, DOWN)}, {format_decimal(self.hi, 20, UP)}]"

    # -- arithmetic --------------------------------------------------------

    def _other(self, x) -> "Enclosure":
        if isinstance(x, Enclosure):
            return x
        return Enclosure.exact(x)

    def __add__(self, other):
        o = self._other(other)
        return Enclosure(
            _mk(_ctx(None, DOWN).add(self.lo.mpfr, o.lo.mpfr), DOWN),
            _mk(_ctx(None, UP).add(self.hi.mpfr, o.hi.mpfr), UP),
        )

    __radd__ = __add__

    def __neg__(self):
        d, u = _ctx(None, DOWN), _ctx(None, UP)
        return Enclosure(_mk(d.minus(self.hi.mpfr), DOWN), _mk(u.minus(self.lo.mpfr), UP))

    def __sub__(self, other):
        o = self._other(other)
        return Enclosure(
            _mk(_ctx(None, DOWN).sub(self.lo.mpfr, o.hi.mpfr), DOWN),
            _mk(_ctx(None, UP).sub(self.hi.mpfr, o.lo.mpfr), UP),
        )

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        o = self._other(other)
        d, u = _ctx(None, DOWN), _ctx(None, UP)
        pairs = [(self.lo.mpfr, o.lo.mpfr), (self.lo.mpfr, o.hi.mpfr),
                 (self.hi.mpfr, o.lo.mpfr), (self.hi.mpfr, o.hi.mpfr)]
        lo = min(d.mul(a, b) for a, b in pairs)
        hi = max(u.mul(a, b) for a, b in pairs)
        return Enclosure(_mk(lo, DOWN), _mk(hi, UP))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o.lo.mpfr <= 0 <= o.hi.mpfr:
            raise DomainError("division by an enclosure containing zero")
        d, u = _ctx(None, DOWN), _ctx(None, UP)
        pairs = [(self.lo.mpfr, o.lo.mpfr), (self.lo.mpfr, o.hi.mpfr),
                 (self.hi.mpfr, o.lo.mpfr), (self.hi.mpfr, o.hi.mpfr)]
        lo = min(d.div(a, b) for a, b in pairs)
        hi = max(u.div(a, b) for a, b in pairs)
        return Enclosure(_mk(lo, DOWN), _mk(hi, UP))

    def __rtruediv__(self, other):
        return self._other(other) / self

    def abs(self):
        if self.lo.mpfr >= 0:
            return self
        if self.hi.mpfr <= 0:
            return -self
        hi = max(abs(self.lo.mpfr), abs(self.hi.mpfr))
        return Enclosure(XReal.from_int(0), XReal(hi, UP))

    # Monotone increasing maps apply endpoint-wise.

    def exp(self, prec=None):
        return Enclosure(
            _mk(_ctx(prec, DOWN).exp(self.lo.mpfr), DOWN),
            _mk(_ctx(prec, UP).exp(self.hi.mpfr), UP),
        )

    def log(self, prec=None):
        if self.lo.mpfr <= 0:
            raise DomainError("log of enclosure touching zero")
        return Enclosure(
            _mk(_ctx(prec, DOWN).log(self.lo.mpfr), DOWN),
            _mk(_ctx(prec, UP).log(self.hi.mpfr), UP),
        )

    def sqrt(self, prec=None):
        if self.lo.mpfr < 0:
            raise DomainError("sqrt of negative enclosure")
        return Enclosure(
            _mk(_ctx(prec, DOWN).sqrt(self.lo.mpfr), DOWN),
            _mk(_ctx(prec, UP).sqrt(self.hi.mpfr), UP),
        )

    def pow(self, exponent, prec=None) -> "Enclosure":
        """Base must be positive; exponent is a Fraction or Enclosure."""
        if self.lo.mpfr <= 0:
            raise DomainError("pow needs a positive base enclosure")
        if isinstance(exponent, int):
            exponent = Fraction(exponent)
        if isinstance(exponent, Fraction):
            if exponent == 0:
                one = XReal.from_int(1)
                return Enclosure(one, one)
            e = Enclosure(
                XReal.from_fraction(exponent, DOWN, prec),
                XReal.from_fraction(exponent, UP, prec),
            )
        else:
            e = exponent
        # x**y = exp(y*log x); each step is a directed enclosure operation.
        return (e * self.log(prec)).exp(prec)

    def min_with(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            XReal(min(self.lo.mpfr, other.lo.mpfr), DOWN),
            XReal(min(self.hi.mpfr, other.hi.mpfr), UP),
        )

    def max_with(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            XReal(max(self.lo.mpfr, other.lo.mpfr), DOWN),
            XReal(max(self.hi.mpfr, other.hi.mpfr), UP),
        )


ZERO = Enclosure.exact(0)
ONE = Enclosure.exact(1)


def format_decimal(x: XReal, sigdigits: int, direction: str) -> str:
    """Exact directed decimal rendering of an XReal.

    The printed value is >= x when rounding up and <= x when rounding down,
    using integer arithmetic only (no double rounding).
    """
    s = x.sign
    if s == 0:
        return "0"
    m, e = x.mpfr.as_mantissa_exp()
    m, e = int(m), int(e)
    neg = m < 0
    m = abs(m)
    # decimal exponent k with 10**k <= m*2**e < 10**(k+1)
    import math

    k = math.floor((e + m.bit_length()) * 0.30102999566398114)
    while _cmp_pow10(m, e, k + 1) >= 0:
        k += 1
    while _cmp_pow10(m, e, k) < 0:
        k -= 1
    # digits = round(m*2**e / 10**(k-sigdigits+1)) with directed rounding
    shift = k - sigdigits + 1
    num, den = m, 1
    if e >= 0:
        num <<= e
    else:
        den <<= -e
    if shift >= 0:
        den *= 10**shift
    else:
        num *= 10**-shift
    q, r = divmod(num, den)
    round_up_mag = (direction == UP and not neg) or (direction == DOWN and neg)
    if r and round_up_mag:
        q += 1
        if q == 10**sigdigits:
            q //= 10
            k += 1
    digits = str(q)
    mant = digits[0] + ("." + digits[1:] if sigdigits > 1 else "")
    sign = "-" if neg else ""
    return f"{sign}{mant}e{k:+03d}"


def _cmp_pow10(m: int, e: int, k: int) -> int:
    """Compare m*2**e with 10**k exactly."""
    # m*2**e ? 5**k*2**k  ->  m*2**(e-k) ? 5**k
    p5 = 5**abs(k)
    le = e - k
    if k >= 0:
        lhs_num, rhs = m, p5
    else:
        lhs_num, rhs = m * p5, 1
    if le >= 0:
        lhs_num <<= le
    else:
        rhs <<= -le
    return (lhs_num > rhs) - (lhs_num < rhs)
