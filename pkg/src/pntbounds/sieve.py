"""Exact desk-scale ground truth: primes, exact pi/theta/psi, the anchor
crossing point, and pointwise verification of bounds over prime gaps.

Primality comes from a segmented numpy sieve.  theta and psi checkpoints are
built from exact prime products whose logarithms are taken once per segment
with directed rounding, so the enclosures are certified, not estimated.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import gmpy2
import numpy as np

from .errors import AboveLimit, DomainError
from .special import as_enclosure, li_moderate
from .xreal import DOWN, UP, Enclosure, XReal, get_precision

_SEGMENT = 1 << 16
_CACHE_MAGIC = b"PNTB\x01"


def _directed_log_of_int(n: int, prec: int) -> Enclosure:
    from .xreal import _ctx, _mk

    if n <= 0:
        raise DomainError("log of non-positive integer")
    if n == 1:
        return Enclosure.exact(0)
    down, up = _ctx(prec, DOWN), _ctx(prec, UP)
    z = gmpy2.mpz(n)
    exact = gmpy2.mpfr(z, precision=max(2, z.bit_length() + 1))
    return Enclosure(_mk(down.log(exact), DOWN), _mk(up.log(exact), UP))


class PrimeStore:
    """Sieve of odd primality to ``limit`` with cumulative checkpoints of
    (pi, theta, psi) every 2^16 integers."""

    def __init__(self, limit: int = 10**8, prec: int = 160, build: bool = True):
        if limit > 10**9:
            raise AboveLimit("sieve limit capped at 1e9")
        if limit < 100:
            raise DomainError("sieve limit too small to be useful")
        self.limit = int(limit)
        self.prec = prec
        if build:
            self._build()

    # -- construction ---------------------------------------------------

    def _build(self):
        self._sieve()
        self._build_checkpoints()
        self._build_prime_powers()

    def _sieve(self):
        n = self.limit
        odd = np.ones((n + 1) // 2, dtype=bool)  # odd[i] ~ primality of 2i+1
        odd[0] = False  # 1
        for p in range(3, isqrt(n) + 1, 2):
            if odd[p // 2]:
                odd[p * p // 2 :: p] = False
        # stored packed (one bit per odd integer); slices unpack on demand
        self._nbits = len(odd)
        self._bits = np.packbits(odd)

    def _odd_slice(self, start: int, stop: int) -> np.ndarray:
        stop = min(stop, self._nbits)
        if stop <= start:
            return np.empty(0, dtype=bool)
        b0, b1 = start // 8, (stop + 7) // 8
        window = np.unpackbits(self._bits[b0:b1]).astype(bool)
        return window[start - 8 * b0 : stop - 8 * b0]

    def _build_checkpoints(self):
        n = self.limit
        nseg = (n + _SEGMENT) // _SEGMENT
        pi = np.zeros(nseg + 1, dtype=np.int64)
        theta_lo = [gmpy2.mpfr(0)]
        theta_hi = [gmpy2.mpfr(0)]
        from .xreal import _ctx

        down, up = _ctx(self.prec, DOWN), _ctx(self.prec, UP)
        acc_lo, acc_hi = gmpy2.mpfr(0), gmpy2.mpfr(0)
        count = 0
        import math

        for s in range(nseg):
            lo_b = s * _SEGMENT
            hi_b = min((s + 1) * _SEGMENT, n + 1)
            ps = self.primes_in(lo_b, hi_b - 1)
            count += len(ps)
            pi[s + 1] = count
            if len(ps):
                lg = _directed_log_of_int(math.prod(ps.tolist()), self.prec)
                acc_lo = down.add(acc_lo, lg.lo.mpfr)
                acc_hi = up.add(acc_hi, lg.hi.mpfr)
            theta_lo.append(acc_lo)
            theta_hi.append(acc_hi)
        self.pi_ckpt = pi
        self.theta_ckpt_lo = theta_lo
        self.theta_ckpt_hi = theta_hi

    def _build_prime_powers(self):
        """Prime powers p^k <= limit with k >= 2, with prefix log sums."""
        entries = []
        for p in self.primes_in(2, isqrt(self.limit)).tolist():
            v = p * p
            while v <= self.limit:
                entries.append((v, p))
                v *= p
        entries.sort()
        self.power_vals = np.array([e[0] for e in entries], dtype=np.int64)
        from .xreal import _ctx

        down, up = _ctx(self.prec, DOWN), _ctx(self.prec, UP)
        lo_acc, hi_acc = gmpy2.mpfr(0), gmpy2.mpfr(0)
        lo_list, hi_list = [], []
        for _v, p in entries:
            lg = _directed_log_of_int(p, self.prec)
            lo_acc = down.add(lo_acc, lg.lo.mpfr)
            hi_acc = up.add(hi_acc, lg.hi.mpfr)
            lo_list.append(lo_acc)
            hi_list.append(hi_acc)
        self.power_log_prefix = (lo_list, hi_list)
        logs = np.log(np.array([p for _v, p in entries], dtype=np.float64)) if entries \
            else np.empty(0)
        self.power_logf_prefix = np.cumsum(logs)

    # -- queries -----------------------------------------------------------

    def is_prime(self, m: int) -> bool:
        if m > self.limit:
            raise AboveLimit(f"{m} exceeds sieve limit {self.limit}")
        if m < 2:
            return False
        if m == 2:
            return True
        if m % 2 == 0:
            return False
        i = m // 2
        return bool((self._bits[i // 8] >> (7 - i % 8)) & 1)

    def primes_in(self, lo: int, hi: int) -> np.ndarray:
        """Primes in [lo, hi] as an int64 array."""
        hi = min(hi, self.limit)
        if hi < 2 or hi < lo:
            return np.empty(0, dtype=np.int64)
        lo = max(lo, 2)
        start = lo // 2 if lo % 2 else (lo + 1) // 2
        stop = (hi - 1) // 2 + 1
        idx = np.nonzero(self._odd_slice(start, stop))[0]
        out = (2 * (idx + start) + 1).astype(np.int64)
        if lo <= 2 <= hi:
            out = np.concatenate(([np.int64(2)], out))
        return out

    def primes(self) -> np.ndarray:
        return self.primes_in(2, self.limit)

    def exact_counts(self, x) -> tuple[int, Enclosure, Enclosure]:
        """(pi(x), theta(x) enclosure, psi(x) enclosure) for 2 <= x <= limit."""
        xf = float(as_enclosure(x).lo.mpfr) if not isinstance(x, (int, float)) else float(x)
        if xf > self.limit:
            raise AboveLimit(f"{xf} exceeds sieve limit {self.limit}")
        if xf < 2:
            raise DomainError("x must be at least 2")
        m = int(xf)
        seg = m // _SEGMENT
        base = seg * _SEGMENT
        pi = int(self.pi_ckpt[seg])
        extra = self.primes_in(base, m)
        pi += len(extra)
        from .xreal import _ctx, _mk

        down, up = _ctx(self.prec, DOWN), _ctx(self.prec, UP)
        tlo, thi = self.theta_ckpt_lo[seg], self.theta_ckpt_hi[seg]
        if len(extra):
            prod = gmpy2.mpz(1)
            for q in extra.tolist():
                prod *= q
            lg = _directed_log_of_int(prod, self.prec)
            tlo = down.add(tlo, lg.lo.mpfr)
            thi = up.add(thi, lg.hi.mpfr)
        theta = Enclosure(_mk(tlo, DOWN), _mk(thi, UP))
        k = int(np.searchsorted(self.power_vals, m, side="right"))
        if k:
            plo, phi = self.power_log_prefix
            psi = Enclosure(
                _mk(down.add(tlo, plo[k - 1]), DOWN),
                _mk(up.add(thi, phi[k - 1]), UP),
            )
        else:
            psi = theta
        return pi, theta, psi

    # -- persistence ------------------------------------------------------

    def save_checkpoints(self, path):
        """Versioned binary cache: magic, limit, stride, then the arrays.

        Endpoint values are serialised as directed decimal strings so a
        reload can only widen, never narrow, the enclosures.
        """
        from .xreal import format_decimal

        def enc(values, direction):
            out = []
            for v in values:
                if gmpy2.is_zero(v):
                    out.append(b"0")
                else:
                    out.append(format_decimal(XReal(v, direction), 55, direction).encode())
            return out

        with open(path, "wb") as fh:
            fh.write(_CACHE_MAGIC)
            fh.write(struct.pack("<QQ", self.limit, _SEGMENT))
            np.save(fh, self.pi_ckpt)
            np.save(fh, np.array(enc(self.theta_ckpt_lo, DOWN)))
            np.save(fh, np.array(enc(self.theta_ckpt_hi, UP)))

    @classmethod
    def from_cache(cls, path, prec: int = 160):
        """Rebuild the sieve but take the theta checkpoints from disk."""
        with open(path, "rb") as fh:
            magic = fh.read(len(_CACHE_MAGIC))
            if magic != _CACHE_MAGIC:
                raise DomainError("not a checkpoint cache (bad magic)")
            limit, stride = struct.unpack("<QQ", fh.read(16))
            if stride != _SEGMENT:
                raise DomainError("checkpoint stride mismatch")
            pi_ckpt = np.load(fh)
            lo = [XReal.from_decimal(s.decode(), DOWN, prec).mpfr for s in np.load(fh)]
            hi = [XReal.from_decimal(s.decode(), UP, prec).mpfr for s in np.load(fh)]
        store = cls(int(limit), prec, build=False)
        store._sieve()
        store.pi_ckpt = pi_ckpt
        store.theta_ckpt_lo = lo
        store.theta_ckpt_hi = hi
        store._build_prime_powers()
        return store


# ---------------------------------------------------------------------------
# Crossing point
# ---------------------------------------------------------------------------


def _theta_at_37(prec) -> Enclosure:
    prod = 1
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        prod *= p
    return _directed_log_of_int(prod, prec)


def _crossing_gap_function(x: Enclosure, prec) -> Enclosure:
    """(pi - Li(x)) log x / x - (theta - x)/x on (37, 41), pi = 12."""
    theta = _theta_at_37(prec)
    li = li_moderate(x, prec)
    return (12 - li) * x.log(prec) / x - (theta - x) / x


def crossing_point(prec: int | None = None, width: Fraction = Fraction(1, 10**10)) -> Enclosure:
    """Enclosure of the point in (37, 41) where the pi-side and theta-side
    normalised errors agree, so the anchor discrepancy vanishes.

    Bisection on certified signs; an ambiguous midpoint sign doubles the
    working precision (up to the 4096-bit ceiling) before giving up."""
    prec = prec or get_precision()
    lo, hi = Fraction(40), Fraction(41 * 10**6 - 1, 10**6)
    flo = _crossing_gap_function(Enclosure.exact(lo), prec)
    fhi = _crossing_gap_function(Enclosure.exact(hi), prec)
    if not (flo.lo.mpfr > 0 and fhi.hi.mpfr < 0):
        raise DomainError("crossing bracket lost its sign change")
    while hi - lo > width:
        mid = (lo + hi) / 2
        p = prec
        while True:
            fm = _crossing_gap_function(Enclosure.exact(mid), p)
            if fm.lo.mpfr > 0:
                lo = mid
                break
            if fm.hi.mpfr < 0:
                hi = mid
                break
            if p >= 4096:
                # the root sits indistinguishably close to mid: the current
                # bracket is already a valid (tiny) enclosure
                return Enclosure(XReal.from_fraction(lo, DOWN, prec),
                                 XReal.from_fraction(hi, UP, prec))
            p = min(2 * p, 4096)
    return Enclosure(XReal.from_fraction(lo, DOWN, prec), XReal.from_fraction(hi, UP, prec))


def crossing_anchor(prec: int | None = None):
    """ExactAnchor at (a rational point inside) the crossing enclosure.

    pi and theta are exactly 12 and sum(log p, p <= 37) there; the
    discrepancy computed from this anchor is a certified near-zero interval.
    """
    from .bounds import ExactAnchor

    prec = prec or get_precision()
    enc = crossing_point(prec)
    x0 = enc.lo.as_fraction()
    return ExactAnchor(
        x0=x0,
        pi_x0=12,
        theta_x0=_theta_at_37(prec),
        li_x0=li_moderate(Enclosure.exact(x0), prec),
        provenance="computed crossing point of the two normalised errors",
        oracle_verifiable=True,
    )


# ---------------------------------------------------------------------------
# Pointwise verification over prime gaps
# ---------------------------------------------------------------------------


@dataclass
class PointwiseReport:
    kind: str
    x_max: int
    checked: int
    max_ratio: float
    max_ratio_at: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _li_at_primes(primes: np.ndarray, li_start: float, p_start: float) -> np.ndarray:
    """Cumulative Simpson for Li at each prime, starting from Li(p_start)."""
    xs = np.concatenate(([p_start], primes.astype(np.float64)))
    a, b = xs[:-1], xs[1:]
    mids = (a + b) / 2
    width = b - a
    inc = width / 6 * (1 / np.log(a) + 4 / np.log(mids) + 1 / np.log(b))
    return li_start + np.cumsum(inc)


def verify_pointwise(store: PrimeStore, kind: str, bound_eval, x_max: int,
                     prec: int | None = None) -> PointwiseReport:
    """Check E_kind(x) <= bound over every prime gap up to x_max.

    ``bound_eval(log_x)`` must accept a numpy array of log-x values and
    return the bound on the normalised error (|pi - Li| / (x/log x) for pi;
    |f(x) - x|/x for theta/psi).  Candidates within a 1e-9 guard band of the
    bound are re-verified in exact enclosure arithmetic; sup over each gap
    is attained at gap endpoints since the counting function is constant
    between jumps.
    """
    prec = prec or get_precision()
    if x_max > store.limit:
        raise AboveLimit(f"{x_max} exceeds sieve limit {store.limit}")
    if kind not in ("pi", "theta", "psi"):
        raise DomainError(f"unknown kind {kind!r}")

    violations = []
    max_ratio, max_at = -1.0, 0.0
    checked = 0
    chunk = 1_000_000
    primes = store.primes_in(2, x_max)
    # theta/psi need the cumulative log sums; pi needs Li.
    run_li = 0.0  # Li(2) = 0
    run_theta = 0.0
    run_count = 0
    p_prev = 2.0
    suspects = []
    for lo_i in range(0, len(primes), chunk):
        ps = primes[lo_i : lo_i + chunk]
        pf = ps.astype(np.float64)
        logs = np.log(pf)
        nxt = np.empty_like(pf)
        nxt[:-1] = pf[1:]
        if lo_i + chunk < len(primes):
            nxt[-1] = float(primes[lo_i + chunk])
        else:
            nxt[-1] = min(float(x_max), float(store.limit))
        if kind == "pi":
            li_vals = _li_at_primes(ps, run_li, p_prev)
            counts = run_count + np.arange(1, len(ps) + 1, dtype=np.float64)
            nxt_li = np.empty_like(li_vals)
            nxt_li[:-1] = li_vals[1:]
            nxt_li[-1] = _li_at_primes(
                np.array([nxt[-1]]), li_vals[-1], pf[-1])[-1]
            r1 = np.abs(counts - li_vals) * logs / pf
            r2 = np.abs(counts - nxt_li) * np.log(nxt) / nxt
            run_li = li_vals[-1]
            run_count += len(ps)
            p_prev = pf[-1]
        else:
            f_vals = run_theta + np.cumsum(logs)
            if kind == "psi":
                k = np.searchsorted(store.power_vals, ps, side="right")
                addon = np.where(k > 0, store.power_logf_prefix[np.maximum(k - 1, 0)], 0.0)
                f_vals = f_vals + addon
            r1 = np.abs(f_vals - pf) / pf
            r2 = np.abs(f_vals - nxt) / nxt
            run_theta = run_theta + float(np.sum(logs))
        b1 = bound_eval(logs)
        b2 = bound_eval(np.log(nxt))
        checked += len(ps)
        bad = (r1 > b1 * (1 - 1e-9)) | (r2 > b2 * (1 - 1e-9))
        for i in np.nonzero(bad)[0].tolist():
            if len(suspects) < 50_000:
                suspects.append(int(ps[i]))
        ratios = np.maximum(r1, r2)
        mr = int(np.argmax(ratios))
        if ratios[mr] > max_ratio:
            max_ratio = float(ratios[mr])
            max_at = float(pf[mr])

    # exact re-verification of guard-band suspects
    for p in suspects:
        pi_p, theta_p, psi_p = store.exact_counts(p)
        nxt_candidates = store.primes_in(p + 1, min(x_max, p + 2000))
        nxt = int(nxt_candidates[0]) if len(nxt_candidates) else x_max
        for xq in (p, nxt):
            xe = Enclosure.exact(xq)
            Lq = xe.log(prec)
            if kind == "pi":
                ratio = (pi_p - li_moderate(xe, prec)).abs() * Lq / xe
            elif kind == "theta":
                ratio = (theta_p - xe).abs() / xe
            else:
                ratio = (psi_p - xe).abs() / xe
            bval = bound_eval(np.array([float(Lq.lo.mpfr)]))[0]
            if float(ratio.lo.mpfr) > bval:
                violations.append((p, xq, float(ratio.lo.mpfr), bval))
    return PointwiseReport(kind, x_max, checked, max_ratio, max_at, violations)


def buthe_envelope(log_x, prec: int | None = None) -> XReal:
    """Up-rounded envelope (1/sqrt x)(1.95 + 3.9/log x + 19.5/log^2 x)."""
    prec = prec or get_precision()
    L = as_enclosure(log_x)
    if L.lo.mpfr <= 0:
        raise DomainError("x must exceed 1")
    inner = (
        Enclosure.from_decimal("1.95")
        + Enclosure.from_decimal("3.9") / L
        + Enclosure.from_decimal("19.5") / (L * L)
    )
    return ((-L / 2).exp(prec) * inner).hi


def envelope_decreasing_on_grid(log_lo, log_hi, nodes: int = 10_000,
                                prec: int | None = None) -> bool:
    """Certify decrease of the envelope across a log-spaced grid: each node's
    down-rounded value must not fall above the previous node's up value."""
    prec = prec or get_precision()
    L_lo, L_hi = float(as_enclosure(log_lo).lo.mpfr), float(as_enclosure(log_hi).hi.mpfr)
    prev_lo = None
    for k in range(nodes + 1):
        g = Fraction(L_lo) + Fraction(L_hi - L_lo) * Fraction(k, nodes)
        L = Enclosure.exact(g)
        inner = (
            Enclosure.from_decimal("1.95")
            + Enclosure.from_decimal("3.9") / L
            + Enclosure.from_decimal("19.5") / (L * L)
        )
        val = (-L / 2).exp(prec) * inner
        if prev_lo is not None and not val.hi.mpfr <= prev_lo:
            return False
        prev_lo = float(val.lo.mpfr)
    return True
