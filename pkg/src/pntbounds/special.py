"""Certified special functions: Dawson's integral, the shifted integral
of e^u/u^2 (equivalently integral of dt/log^2 t), and the offset logarithmic
integral.

All routines return :class:`~pntbounds.xreal.Enclosure` values whose
endpoints come from directed-rounded operations plus explicit
truncation-remainder bounds, so the true quantity always lies inside.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError
from .xreal import Enclosure, XReal, get_precision, working_precision

# Ei power series is used below this argument; integration by parts above.
_SERIES_SPLIT = 64
_LI_MODERATE_CAP = 10**18


def as_enclosure(x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    if isinstance(x, XReal):
        from .xreal import DOWN, UP

        return Enclosure(XReal(x.mpfr, DOWN), XReal(x.mpfr, UP))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError("non-finite argument")
        return Enclosure.exact(Fraction(x))
    if isinstance(x, (int, Fraction)):
        return Enclosure.exact(x)
    if isinstance(x, str):
        return Enclosure.from_decimal(x)
    raise TypeError(f"cannot interpret {type(x)} as a real number")


def _negligible(part: Enclosure, whole: Enclosure, margin_bits: int) -> bool:
    """part < 2^-margin * whole, compared through binary exponents."""
    if part.hi.sign == 0:
        return True
    if whole.lo.sign == 0 and whole.hi.sign == 0:
        return False
    ref = whole.hi if whole.lo.sign == 0 else whole.lo
    return part.hi.log2_exponent < ref.log2_exponent - margin_bits


def _euler_gamma(prec) -> Enclosure:
    from .xreal import DOWN, UP, _ctx, _mk

    return Enclosure(
        _mk(_ctx(prec, DOWN).const_euler(), DOWN),
        _mk(_ctx(prec, UP).const_euler(), UP),
    )


def exp_integral(w, prec: int | None = None) -> Enclosure:
    """Ei(w) for 0 < w <= 96 via the everywhere-positive power series.

    Ei(w) = gamma + log w + sum_{n>=1} w^n/(n*n!); once the term ratio drops
    under 1/2 the dropped tail is at most the last included term.
    """
    prec = prec or get_precision()
    w = as_enclosure(w)
    if w.lo.mpfr <= 0:
        raise DomainError("exp_integral requires w > 0")
    wf = float(w.hi.mpfr)
    if wf > 96:
        raise DomainError("series range exceeded; use j_integral machinery")
    with working_precision(prec + 32):
        acc = Enclosure.exact(0)
        term = Enclosure.exact(1)  # w^n / n!
        n = 0
        while True:
            n += 1
            term = term * w / n
            contrib = term / n
            acc = acc + contrib
            if wf / (n + 1) < 0.5 and _negligible(contrib, acc, prec + 16):
                acc = acc + Enclosure.from_endpoints(0, contrib.hi)
                break
            if n > 1500:
                raise DomainError("Ei series failed to converge")
        return acc + _euler_gamma(prec) + w.log(prec)


def _ibp_partial(u: Enclosure, s: Enclosure, K: int, prec) -> Enclosure:
    """e^(u-s) * sum_{k=0}^{K-1} (k+1)!/u^(k+2)."""
    inv = 1 / u
    acc = Enclosure.exact(0)
    coeff = Enclosure.exact(1)
    upow = inv * inv
    for k in range(K):
        acc = acc + coeff * upow
        coeff = coeff * (k + 2)
        upow = upow * inv
    return acc * (u - s).exp(prec)


def _j_ibp(a: Enclosure, b: Enclosure, s: Enclosure, prec) -> Enclosure:
    """integral_a^b e^(u-s)/u^2 du by repeated integration by parts.

    Remainder (K+1)! int_a^b e^(u-s)/u^(K+2) du is enclosed in [0, bound]
    using d/du(e^u u^-m) >= e^u u^-m (1 - m/a) for u >= a > m.
    """
    afloat = float(a.lo.mpfr)
    K = max(4, min(int(afloat) - 8, 60))
    main = _ibp_partial(b, s, K, prec) - _ibp_partial(a, s, K, prec)
    m = K + 2
    fact = Enclosure.exact(math.factorial(K + 1))
    edge = (b - s).exp(prec) * b.pow(-m, prec)
    denom = 1 - Enclosure.exact(m) / a
    if denom.lo.mpfr <= 0:
        raise DomainError("integration-by-parts depth exceeds lower endpoint")
    rem_hi = (fact * edge / denom).hi
    return main + Enclosure.from_endpoints(0, rem_hi)


def _j_series(a: Enclosure, b: Enclosure, prec) -> Enclosure:
    # int e^u/u^2 = Ei(u) - e^u/u; antiderivative difference, unshifted.
    ga = exp_integral(a, prec) - a.exp(prec) / a
    gb = exp_integral(b, prec) - b.exp(prec) / b
    return gb - ga


def j_integral(a, b, s, prec: int | None = None) -> Enclosure:
    """Certified enclosure of integral_a^b e^(u-s)/u^2 du  (1 < a <= b <= s).

    This is e^-s times the integral of dt/(log t)^2 from e^a to e^b; the
    shift keeps every magnitude representable when b is huge.
    """
    prec = prec or get_precision()
    a, b, s = as_enclosure(a), as_enclosure(b), as_enclosure(s)
    if a.lo.mpfr <= 1:
        raise DomainError("j_integral requires a > 1")
    if a.lo.mpfr > b.lo.mpfr:
        raise DomainError("j_integral requires a <= b")
    if a.lo.mpfr == b.hi.mpfr:
        return Enclosure.exact(0)
    if b.hi.mpfr > s.hi.mpfr:
        raise DomainError("j_integral requires s >= b")

    with working_precision(prec + 48):
        pieces = []
        bf = float(b.hi.mpfr)
        af = float(a.lo.mpfr)
        lo = a
        # Far-below-b prefix: 0 <= integral_a^cut <= e^(cut-s)/a^2.
        cut = bf - (0.75 * prec + 64)
        if af < cut:
            cutE = Enclosure.exact(Fraction(cut))
            bound = ((cutE - s).exp(prec) / (a * a)).hi
            pieces.append(Enclosure.from_endpoints(0, bound))
            lo = cutE
        lof = float(lo.lo.mpfr)
        if lof < _SERIES_SPLIT:
            top = b if bf <= _SERIES_SPLIT else Enclosure.exact(_SERIES_SPLIT)
            pieces.append(_j_series(lo, top, prec) * (-s).exp(prec))
            lo = top
        if float(lo.lo.mpfr) < bf:
            pieces.append(_j_ibp(lo, b, s, prec))
        total = Enclosure.exact(0)
        for p in pieces:
            total = total + p
        # The integrand is positive; clip any rounding dip below zero.
        return total.max_with(Enclosure.exact(0))


_LI2_CACHE: dict[int, Enclosure] = {}


def li2(prec: int | None = None) -> Enclosure:
    """li(2) = Ei(log 2), enclosed once per precision (about 1.04516)."""
    prec = prec or get_precision()
    e = _LI2_CACHE.get(prec)
    if e is None:
        ln2 = Enclosure.exact(2).log(prec)
        e = exp_integral(ln2, prec)
        _LI2_CACHE[prec] = e
    return e


def li_moderate(x, prec: int | None = None) -> Enclosure:
    """Offset logarithmic integral Li(x) = integral_2^x dt/log t, x <= 1e18."""
    prec = prec or get_precision()
    x = as_enclosure(x)
    if x.lo.mpfr < 2:
        raise DomainError("Li is defined here for x >= 2")
    if float(x.hi.mpfr) > float(_LI_MODERATE_CAP) * 1.0000001:
        raise DomainError("li_moderate is restricted to x <= 1e18")
    if x.lo.mpfr == 2 and x.hi.mpfr == 2:
        return Enclosure.exact(0)
    return exp_integral(x.log(prec), prec) - li2(prec)


def li_from_log(logx, prec: int | None = None) -> Enclosure:
    """Li(e^w) for w <= 96, used by desk-scale identities."""
    prec = prec or get_precision()
    return exp_integral(as_enclosure(logx), prec) - li2(prec)


# ---------------------------------------------------------------------------
# Dawson's integral
# ---------------------------------------------------------------------------


def _dawson_taylor_point(y: XReal, prec: int) -> Enclosure:
    """Alternating series sum (-1)^n 2^n y^(2n+1)/(2n+1)!! at an exact point;
    cancellation up to e^(y^2) is absorbed by a working-precision boost of
    ~1.443 y^2 bits."""
    yf = float(y.mpfr)
    with working_precision(prec + int(1.4427 * yf * yf) + 48):
        ypt = Enclosure(y, y)
        ysq = ypt * ypt
        term = ypt
        acc = Enclosure.exact(0)
        n = 0
        sign = 1
        while True:
            acc = acc + (term if sign > 0 else -term)
            n += 1
            term = term * ysq * Fraction(2, 2 * n + 1)
            sign = -sign
            if 2 * yf * yf / (2 * n + 1) < 1 and _negligible(term, acc, prec + 16):
                pad = Enclosure.from_endpoints(0, term.hi)
                return Enclosure((acc - pad).lo, (acc + pad).hi)
            if n > 40000:
                raise DomainError("Dawson Taylor series failed to converge")


def _dawson_taylor(y: Enclosure, prec: int) -> Enclosure:
    """Mean-value form around the midpoint.  |D'| = |1 - 2yD| <= 3 for all
    y >= 0 (D <= y gives yD <= 1 on [0,1]; splitting the defining integral
    at y-1 gives yD <= y/2 + 1 on [1,2] and yD <= y/(2y-2) + y(y-1)e^(1-2y)
    <= 1.1 beyond), so D over [lo,hi] lies within 3*radius of D(mid)."""
    from .xreal import UP, _ctx

    if y.lo.mpfr == y.hi.mpfr:
        return _dawson_taylor_point(y.lo, prec)
    up = _ctx(prec + 32, UP)
    width = float(up.sub(y.hi.mpfr, y.lo.mpfr))
    n = max(1, min(256, int(width * 64) + 1))
    import gmpy2

    bounds = [y.lo.mpfr] + [
        up.add(y.lo.mpfr, up.mul(up.sub(y.hi.mpfr, y.lo.mpfr), gmpy2.mpq(k, n)))
        for k in range(1, n)
    ] + [y.hi.mpfr]
    pieces = []
    for p, q in zip(bounds, bounds[1:]):
        mid = up.div(up.add(p, q), 2)
        rad = max(up.sub(q, mid), up.sub(mid, p))
        pad = Enclosure.from_endpoints(0, XReal(up.mul(rad, 3), UP))
        d = _dawson_taylor_point(XReal(mid, UP), prec)
        pieces.append(Enclosure((d - pad).lo, (d + pad).hi))
    out = pieces[0]
    for p in pieces[1:]:
        out = Enclosure(
            XReal(min(out.lo.mpfr, p.lo.mpfr), out.lo.tag),
            XReal(max(out.hi.mpfr, p.hi.mpfr), out.hi.tag),
        )
    return out.max_with(Enclosure.exact(0))


def _dawson_asymptotic(y: Enclosure, prec: int) -> Enclosure:
    """D(y) = (1/2y) int_0^{y^2} e^-v (1-v/y^2)^(-1/2) dv.  Expanding the
    square root in v/y^2 and cutting the v-range at V = y^2/2 gives the
    classical series (2k-1)!!/2^(k+1) y^-(2k+1) with computable incomplete
    gamma corrections; the two dropped tails are enclosed in [0, bound]."""
    with working_precision(prec + 48):
        y2 = y * y
        V = y2 * Fraction(1, 2)
        emV = (-V).exp(prec)
        inv_y2 = 1 / y2
        d = Enclosure.exact(1)  # (2k-1)!!/2^k
        ek = Enclosure.exact(1)  # sum_{j<=k} V^j/j!
        vpow = Enclosure.exact(1)
        p = Enclosure.exact(1)  # y^-2k
        acc = Enclosure.exact(0)
        K_cap = max(8, min(int(float(y.lo.mpfr) ** 2 / 2) - 2, prec))
        k = 0
        while True:
            acc = acc + d * p * (1 - emV * ek)
            k += 1
            if k >= K_cap:
                break
            d = d * Fraction(2 * k - 1, 2)
            vpow = vpow * V / k
            ek = ek + vpow
            p = p * inv_y2
            if _negligible(d * p, acc, prec + 16):
                break
        # dropped series tail <= 2 d_k y^-2k ; cut-range tail <= sqrt2 y^2 e^-V
        err = Enclosure.from_endpoints(0, (d * p * 2).hi) + Enclosure.from_endpoints(
            0, (y2 * emV * 2).hi
        )
        return (acc + err) / (y * 2)


def dawson(y, prec: int | None = None) -> Enclosure:
    """Certified enclosure of D(y) = e^(-y^2) integral_0^y e^(t^2) dt, y >= 0.

    Relative width stays below ~2^(-prec/2) across the whole range used by
    the conversions (y up to 1e4 and beyond).
    """
    prec = prec or get_precision()
    y = as_enclosure(y)
    if y.lo.mpfr < 0:
        raise DomainError("dawson requires y >= 0")
    if y.hi.mpfr == 0:
        return Enclosure.exact(0)
    switch = max(12.5, math.sqrt(2 * ((prec / 2 + 8) * math.log(2) + 12)))
    if float(y.hi.mpfr) <= switch:
        return _dawson_taylor(y, prec)
    return _dawson_asymptotic(y, prec)
