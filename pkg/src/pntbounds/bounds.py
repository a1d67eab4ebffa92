"""Data model for admissible bounds plus the elementary analytic facts.

An *asymptotic* bound is the curve A (log x / R)^B exp(-C sqrt(log x / R))
valid for all x >= x0; a *numerical* bound is a step table whose row
(log x0, eps) asserts that the relative error stays below eps for every
x >= e^(log x0).
"""

from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BelowTable, DomainError
from .special import as_enclosure
from .xreal import UP, Enclosure, XReal, get_precision

DEFAULT_R = "5.5666305"

KINDS = ("psi", "theta", "pi")


@dataclass(frozen=True)
class AsymptoticBound:
    """Admissible asymptotic bound: E_kind(x) <= A(log x/R)^B e^(-C sqrt(log x/R))
    for all x >= exp(log_x0)."""

    kind: str
    A: Enclosure
    B: Fraction
    C: Enclosure
    R: Enclosure
    log_x0: Enclosure

    @classmethod
    def make(cls, kind, A, B, C, R=DEFAULT_R, log_x0=None) -> "AsymptoticBound":
        if kind not in KINDS:
            raise DomainError(f"unknown kind {kind!r}")
        A = as_enclosure(A)
        C = as_enclosure(C)
        R = as_enclosure(R)
        if log_x0 is None:
            log_x0 = Enclosure.exact(2).log()
        else:
            log_x0 = as_enclosure(log_x0)
        if A.lo.mpfr <= 0 or C.lo.mpfr <= 0 or R.lo.mpfr <= 0:
            raise DomainError("A, C, R must be positive")
        if isinstance(B, float):
            B = Fraction(B).limit_denominator(10**9)
        return cls(kind, A, Fraction(B), C, R, log_x0)

    def with_A(self, A: Enclosure, kind: str | None = None, log_x0=None) -> "AsymptoticBound":
        return AsymptoticBound(
            kind or self.kind, A, self.B, self.C, self.R,
            as_enclosure(log_x0) if log_x0 is not None else self.log_x0,
        )


def eval_asymp(bound: AsymptoticBound, log_x, prec: int | None = None) -> Enclosure:
    """Enclosure of the bound curve at log x (hi endpoint is the certified value).

    Evaluating below the validity threshold is allowed (comparison plots,
    interpolation proofs) but warns.
    """
    prec = prec or get_precision()
    L = as_enclosure(log_x)
    if L.hi.mpfr < bound.log_x0.lo.mpfr:
        warnings.warn("evaluating asymptotic bound below its validity threshold",
                      stacklevel=2)
    if L.lo.mpfr <= 0:
        raise DomainError("log x must be positive")
    t = L / bound.R
    return bound.A * t.pow(bound.B, prec) * (-(bound.C * t.sqrt(prec))).exp(prec)


def to_plain_form(bound: AsymptoticBound, prec: int | None = None):
    """Rewrite without the R-normalisation: coefficients (A', B, C') with
    A'(log x)^B exp(-C' sqrt(log x)) >= the original curve everywhere.

    A' = A/R^B rounded up and C' = C/sqrt(R) rounded down keep the plain
    form a certified upper bound.
    """
    prec = prec or get_precision()
    a_plain = (bound.A / bound.R.pow(bound.B, prec)).hi
    c_plain = (bound.C / bound.R.sqrt(prec)).lo
    return a_plain, bound.B, c_plain


@dataclass(frozen=True)
class DecreasingFrom:
    """Where g(a,b,c,x) = x^-a (log x)^b e^(c sqrt(log x)) stops increasing.

    ``always`` means decreasing for every x > 1.  Otherwise ``log_threshold``
    is the log-scale point where the derivative factor changes sign;
    ``decreasing_side`` records on which side of it g decreases ("above" for
    a > 0; "below" for a = 0, where g grows without bound afterwards).
    """

    always: bool
    log_threshold: Enclosure | None = None
    decreasing_side: str = "above"


def decreasing_from(a, b, c, prec: int | None = None) -> DecreasingFrom:
    prec = prec or get_precision()
    a, b, c = as_enclosure(a), as_enclosure(b), as_enclosure(c)
    if a.lo.mpfr < 0 or c.lo.mpfr <= 0:
        raise DomainError("need a >= 0 and c > 0")
    if a.lo.mpfr > 0:
        crit = -(c * c) / (a * 16)
        if b.hi.mpfr < crit.lo.mpfr:
            return DecreasingFrom(always=True)
        disc = (c * c * Fraction(1, 4) + a * b * 4).max_with(Enclosure.exact(0))
        u = c / (a * 4) + disc.sqrt(prec) / (a * 2)
        return DecreasingFrom(False, u * u, "above")
    # a = 0: the derivative factor b + (c/2) sqrt(log x) is negative only
    # below sqrt(log x) = -2b/c, so g decreases before that point and
    # increases after it (the exponential wins).
    if b.hi.mpfr >= 0:
        return DecreasingFrom(False, Enclosure.exact(0), "below")
    u = (-b * 2) / c
    return DecreasingFrom(False, u * u, "below")


def g_slope_factor(a, b, c, log_x, prec: int | None = None) -> Enclosure:
    """Sign of d/dx g(a,b,c,x) equals the sign of -a L + b + (c/2) sqrt(L)."""
    a, b, c, L = (as_enclosure(v) for v in (a, b, c, log_x))
    return -(a * L) + b + c * L.sqrt(prec) / 2


def curve_decreasing_threshold(bound: AsymptoticBound) -> Enclosure:
    """log-scale point past which the asymptotic curve itself decreases.

    In u = sqrt(log x / R) the curve is A u^(2B) e^(-Cu), decreasing for
    u > 2B/C, i.e. log x > 4 B^2 R / C^2.
    """
    B2 = Enclosure.exact(Fraction(4) * bound.B * bound.B)
    return B2 * bound.R / (bound.C * bound.C)


@dataclass(frozen=True)
class StepRow:
    log_x: XReal          # up-rounded: claims validity no earlier than printed
    eps: XReal            # up-rounded bound value
    log_x_text: str
    eps_text: str
    provenance: str = ""


@dataclass
class StepBoundTable:
    """Sorted step-function bound: row (log_x, eps) covers all x >= e^log_x."""

    kind: str
    rows: list[StepRow]
    provenance: str = ""
    _keys: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown kind {self.kind!r}")
        for r, s in zip(self.rows, self.rows[1:]):
            if not r.log_x.mpfr < s.log_x.mpfr:
                raise DomainError("step table rows must be strictly increasing")
        self._keys = [r.log_x.mpfr for r in self.rows]

    @classmethod
    def from_pairs(cls, kind, pairs, provenance="") -> "StepBoundTable":
        rows = []
        for entry in pairs:
            lx, eps = entry[0], entry[1]
            prov = entry[2] if len(entry) > 2 else ""
            rows.append(StepRow(
                XReal.from_decimal(str(lx), UP),
                XReal.from_decimal(str(eps), UP),
                str(lx), str(eps), prov,
            ))
        return cls(kind, rows, provenance)

    def first_log_x(self) -> XReal:
        return self.rows[0].log_x

    def row_index_at(self, log_x) -> int:
        q = as_enclosure(log_x).lo.mpfr
        i = bisect.bisect_right(self._keys, q) - 1
        if i < 0:
            raise BelowTable(
                f"log x = {float(q):.6g} precedes the first table row "
                f"({self.rows[0].log_x_text})"
            )
        return i

    def eval_step(self, log_x) -> XReal:
        """Value of the last row at or before log_x (step semantics)."""
        return self.rows[self.row_index_at(log_x)].eps

    def non_monotone_rows(self) -> list[int]:
        """Indices where eps increases relative to the previous row."""
        bad = []
        for i in range(1, len(self.rows)):
            if self.rows[i].eps.mpfr > self.rows[i - 1].eps.mpfr:
                bad.append(i)
        return bad

    def rows_between(self, lo, hi) -> list[StepRow]:
        lo_v = as_enclosure(lo).lo.mpfr
        hi_v = as_enclosure(hi).hi.mpfr
        return [r for r in self.rows if lo_v < r.log_x.mpfr < hi_v]


@dataclass(frozen=True)
class ExactAnchor:
    """A point where pi, theta and Li are known: the transfer ingredient."""

    x0: Fraction
    pi_x0: int
    theta_x0: Enclosure
    li_x0: Enclosure
    provenance: str = ""
    oracle_verifiable: bool = False

    def log_x0(self, prec: int | None = None) -> Enclosure:
        return Enclosure.exact(self.x0).log(prec)


@dataclass(frozen=True)
class Partition:
    """Strictly increasing log-scale breakpoints b_1 < ... < b_N."""

    points: tuple

    def __post_init__(self):
        pts = tuple(as_enclosure(p) for p in self.points)
        if len(pts) < 2:
            raise DomainError("partition needs at least two points")
        for p, q in zip(pts, pts[1:]):
            if not p.hi.mpfr < q.lo.mpfr and not p.lo.mpfr < q.lo.mpfr:
                raise DomainError("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)
