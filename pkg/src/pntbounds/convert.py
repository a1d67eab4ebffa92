"""The six bound conversions, each a total function from input bounds
(plus anchors/partitions) to certified output bounds.

Asymptotic route:  psi -> theta via the prime-power correction factor nu,
theta -> pi via the overhead factor mu built from an exact anchor and the
Dawson function.  Numerical route: the same shape with step tables, a
partition sum of integrals of dt/log^2 t, and a tail term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bounds import (
    AsymptoticBound,
    ExactAnchor,
    Partition,
    StepBoundTable,
    curve_decreasing_threshold,
    eval_asymp,
)
from .errors import (
    BelowTable,
    BranchMisuse,
    DomainError,
    HypothesisViolated,
    PartitionNotCovered,
)
from .special import as_enclosure, dawson, j_integral
from .xreal import Enclosure, XReal, get_precision


@dataclass(frozen=True)
class GapCoefficients:
    """Coefficients (a1, a2) of the psi-theta gap term
    a1 log(x0) x0^(-1/2) + a2 log(x0) x0^(-2/3), user-supplied configuration
    with named provenance."""

    a1: Enclosure
    a2: Enclosure
    valid_from_log_x0: Enclosure
    provenance: str = ""

    def __post_init__(self):
        if self.a1.lo.mpfr <= 0 or self.a2.lo.mpfr <= 0:
            raise DomainError("gap coefficients must be positive")


# Calibrated so the shipped psi->theta conversion reproduces the published
# nu(e^30) <= 6.3376e-7 headline; replace with exact upstream constants when
# tighter provenance is needed.
DEFAULT_GAP_COEFFICIENTS = GapCoefficients(
    a1=Enclosure.from_decimal("1.00007"),
    a2=Enclosure.from_decimal("1.099"),
    valid_from_log_x0=Enclosure.exact(30),
    provenance="calibrated against the published nu(e^30) value; "
    "not independently derived",
)


@dataclass(frozen=True)
class AnchorDiscrepancy:
    """|(pi(x0)-Li(x0))/(x0/log x0) - (theta(x0)-x0)/x0| with outward rounding."""

    anchor: ExactAnchor
    value: Enclosure

    @property
    def log_x0(self) -> Enclosure:
        return self.anchor.log_x0()


def anchor_discrepancy(anchor: ExactAnchor, prec: int | None = None) -> AnchorDiscrepancy:
    prec = prec or get_precision()
    x0 = Enclosure.exact(anchor.x0)
    logx0 = x0.log(prec)
    pi_term = (Enclosure.exact(anchor.pi_x0) - anchor.li_x0) / (x0 / logx0)
    theta_term = (anchor.theta_x0 - x0) / x0
    return AnchorDiscrepancy(anchor, (pi_term - theta_term).abs())


def signed_anchor_discrepancy(anchor: ExactAnchor, prec: int | None = None) -> Enclosure:
    """Signed version, for reporting and the crossing-point check."""
    prec = prec or get_precision()
    x0 = Enclosure.exact(anchor.x0)
    logx0 = x0.log(prec)
    pi_term = (Enclosure.exact(anchor.pi_x0) - anchor.li_x0) / (x0 / logx0)
    theta_term = (anchor.theta_x0 - x0) / x0
    return pi_term - theta_term


def _check_B_hypothesis_theta_pi(bound: AsymptoticBound):
    B = Enclosure.exact(bound.B)
    if B.lo.mpfr < Fraction(3, 2):
        raise HypothesisViolated(f"B = {bound.B} < 3/2")
    rhs = 1 + (bound.C * bound.C) / (bound.R * 16)
    if not B.lo.mpfr >= rhs.hi.mpfr:
        raise HypothesisViolated("B >= 1 + C^2/(16R) could not be certified")


def nu_asymp(psi: AsymptoticBound, a: GapCoefficients, log_x0,
             prec: int | None = None) -> Enclosure:
    """Multiplicative overhead converting a psi-bound into a theta-bound:

    nu(x0) = (1/A)(R/log x0)^B exp(C sqrt(log x0/R))
             (a1 log(x0) x0^(-1/2) + a2 log(x0) x0^(-2/3)).
    """
    prec = prec or get_precision()
    if psi.kind != "psi":
        raise DomainError("nu_asymp starts from a psi bound")
    B = Enclosure.exact(psi.B)
    rhs = (psi.C * psi.C) / (psi.R * 8)
    if not B.lo.mpfr > rhs.hi.mpfr:
        raise HypothesisViolated("B > C^2/(8R) could not be certified")
    L = as_enclosure(log_x0)
    if L.lo.mpfr < a.valid_from_log_x0.lo.mpfr:
        raise HypothesisViolated(
            "gap coefficients are not certified below their validity threshold")
    if L.lo.mpfr < psi.log_x0.lo.mpfr:
        raise HypothesisViolated("nu_asymp evaluated below the psi bound's x0")
    t = L / psi.R
    pref = t.pow(-psi.B, prec) * (psi.C * t.sqrt(prec)).exp(prec) / psi.A
    gap = a.a1 * L * (-L / 2).exp(prec) + a.a2 * L * (-L * Fraction(2, 3)).exp(prec)
    return pref * gap


def psi_to_theta_asymp(psi: AsymptoticBound, a: GapCoefficients,
                       log_x0=None, prec: int | None = None) -> AsymptoticBound:
    """A_theta = A_psi (1 + nu(x0)); B, C, R unchanged."""
    prec = prec or get_precision()
    L = as_enclosure(log_x0) if log_x0 is not None else psi.log_x0
    nu = nu_asymp(psi, a, L, prec)
    A_theta = psi.A * (1 + nu)
    return psi.with_A(A_theta, kind="theta", log_x0=L)


def mu_asymp(theta: AsymptoticBound, disc: AnchorDiscrepancy, log_x1,
             prec: int | None = None) -> Enclosure:
    """Overhead converting a theta-bound into a pi-bound past x1:

    mu(x0,x1) = (x0 log x1)/(eps_theta(x1) x1 log x0) * disc
                + 2 D(sqrt(log x1) - C/(2 sqrt R)) / sqrt(log x1).
    """
    prec = prec or get_precision()
    if theta.kind != "theta":
        raise DomainError("mu_asymp starts from a theta bound")
    _check_B_hypothesis_theta_pi(theta)
    L1 = as_enclosure(log_x1)
    if L1.hi.mpfr < theta.log_x0.lo.mpfr:
        raise HypothesisViolated("x1 >= x0 could not be certified")
    shift = theta.C / (theta.R.sqrt(prec) * 2)
    floor = (1 + shift) * (1 + shift)
    if not L1.lo.mpfr >= floor.hi.mpfr:
        raise HypothesisViolated(
            "log x1 >= (1 + C/(2 sqrt R))^2 could not be certified")
    L0 = disc.log_x0
    eps1 = eval_asymp(theta, L1, prec)
    # x0/x1 assembled as exp(log x0 - log x1): exact in the wide exponent range
    pref = (L1 / L0) * (L0 - L1).exp(prec) / eps1
    term1 = pref * disc.value
    sq1 = L1.sqrt(prec)
    term2 = dawson(sq1 - shift, prec) * 2 / sq1
    return term1 + term2


def theta_to_pi_asymp(theta: AsymptoticBound, disc: AnchorDiscrepancy, log_x1,
                      prec: int | None = None) -> AsymptoticBound:
    """A_pi = A_theta (1 + mu(x0, x1)), valid for x >= x1."""
    prec = prec or get_precision()
    mu = mu_asymp(theta, disc, log_x1, prec)
    return theta.with_A(theta.A * (1 + mu), kind="pi", log_x0=as_enclosure(log_x1))


def psi_to_pi_asymp(psi: AsymptoticBound, a: GapCoefficients,
                    disc: AnchorDiscrepancy, log_x1, log_x0=None,
                    prec: int | None = None) -> AsymptoticBound:
    """Composition: A_pi = (1 + nu(x0))(1 + mu(x0, x1)) A_psi."""
    theta = psi_to_theta_asymp(psi, a, log_x0, prec)
    return theta_to_pi_asymp(theta, disc, log_x1, prec)


@dataclass(frozen=True)
class PsiThetaNumResult:
    eps_theta: XReal            # up-rounded admissible theta bound
    one_sided_upper: XReal      # (theta(x)-x)/x <= eps_psi on the same range


def psi_to_theta_num(eps_psi, log_x0, prec: int | None = None) -> PsiThetaNumResult:
    """eps_theta = eps_psi + 1.00000002(x^-1/2 + x^-2/3 + x^-4/5)
    + 0.94(x^-3/4 + x^-5/6 + x^-9/10), all powers taken in log scale."""
    prec = prec or get_precision()
    e = as_enclosure(eps_psi)
    L = as_enclosure(log_x0)
    if L.lo.mpfr <= 0 or float(L.lo.mpfr) < 0.6931:
        raise DomainError("x0 > 2 required")

    def p(num, den):
        return (-L * Fraction(num, den)).exp(prec)

    c1 = Enclosure.from_decimal("1.00000002")
    c2 = Enclosure.from_decimal("0.94")
    total = e + c1 * (p(1, 2) + p(2, 3) + p(4, 5)) + c2 * (p(3, 4) + p(5, 6) + p(9, 10))
    return PsiThetaNumResult(eps_theta=total.hi, one_sided_upper=e.hi)


def _gap_contribution(eps_i, a, b, log_x1, prec) -> Enclosure:
    """eps_i * integral_a^b e^(u - log x1)/u^2 du, with a cheap certified
    bracket for gaps so deep below x1 that they cannot affect the result."""
    depth = float(log_x1.lo.mpfr) - float(b.hi.mpfr)
    if depth > 0.75 * prec + 80:
        crude = (b - log_x1).exp(prec) * (b - a) / (a * a)
        return Enclosure.from_endpoints(0, (as_enclosure(eps_i) * crude).hi)
    return as_enclosure(eps_i) * j_integral(a, b, log_x1, prec)


def mu_num(disc: AnchorDiscrepancy, table: StepBoundTable, part: Partition,
           log_x1, log_x2=None, prec: int | None = None) -> Enclosure:
    """Overhead converting a numerical theta-bound into a pi-bound on [x1, x2].

    The partition must run from log x0 (the anchor) to log x1; every point
    needs an admissible table row at or below it.  For x2 beyond x1 log x1
    (including infinity) the tail term is 1/(log x1 + log log x1 - 1),
    otherwise it is log(x2)/x2 * integral_{x1}^{x2} dt/log^2 t.
    """
    prec = prec or get_precision()
    if table.kind != "theta":
        raise DomainError("mu_num consumes a theta step table")
    L1 = as_enclosure(log_x1)
    L0 = disc.log_x0
    pts = list(part.points)
    if not (pts[0].lo.mpfr <= L0.hi.mpfr and L0.lo.mpfr <= pts[0].hi.mpfr):
        raise DomainError("partition must start at the anchor's log x0")
    if not (pts[-1].lo.mpfr <= L1.hi.mpfr and L1.lo.mpfr <= pts[-1].hi.mpfr):
        raise DomainError("partition must end at log x1")
    ln14 = Enclosure.exact(14).log(prec)
    if L1.hi.mpfr < ln14.lo.mpfr:
        raise HypothesisViolated("x1 >= 14 could not be certified")
    if L1.hi.mpfr < L0.lo.mpfr:
        raise HypothesisViolated("x1 >= x0 could not be certified")

    try:
        eps1 = table.eval_step(L1)
    except BelowTable as exc:
        raise PartitionNotCovered(str(exc)) from None
    eps1E = as_enclosure(eps1)

    term1 = (L1 / L0) * (L0 - L1).exp(prec) / eps1E * disc.value

    total = Enclosure.exact(0)
    for a, b in zip(pts, pts[1:]):
        try:
            eps_i = table.eval_step(a)
        except BelowTable as exc:
            raise PartitionNotCovered(str(exc)) from None
        total = total + _gap_contribution(eps_i, a, b, L1, prec)
    term2 = total * L1 / eps1E

    loglog = L1.log(prec)
    cap = L1 + loglog
    if log_x2 is None or log_x2 == float("inf"):
        finite = False
    else:
        L2 = as_enclosure(log_x2)
        if L2.hi.mpfr < L1.lo.mpfr:
            raise BranchMisuse("x2 < x1")
        # Finite branch needs x2 at or below x1 log x1 (tie inclusive).  The
        # interval peak sits strictly past x1 log x1, so a cap-enclosure of
        # negligible width cannot flip validity; on a genuinely ambiguous
        # comparison we fall back to the branch valid for every x > x1.
        finite = L2.hi.mpfr <= cap.hi.mpfr and float(cap.width().mpfr) < 1e-6
    if finite:
        term3 = L2 * j_integral(L1, L2, L2, prec)
    else:
        term3 = 1 / (cap - 1)
    return term1 + term2 + term3


def pi_num_on_interval(table: StepBoundTable, part: Partition,
                       disc: AnchorDiscrepancy, log_x1, log_x2=None,
                       prec: int | None = None) -> XReal:
    """eps_pi(x1, x2) = eps_theta(x1) (1 + mu_num(x0, x1, x2)), up-rounded."""
    prec = prec or get_precision()
    mu = mu_num(disc, table, part, log_x1, log_x2, prec)
    eps1 = as_enclosure(table.eval_step(as_enclosure(log_x1)))
    return (eps1 * (1 + mu)).hi


def default_partition(disc: AnchorDiscrepancy, table: StepBoundTable, log_x1,
                      extra=None) -> Partition:
    """Partition of [log x0, log x1] through every table row in between."""
    L0, L1 = disc.log_x0, as_enclosure(log_x1)
    pts = [L0]
    inner = [as_enclosure(r.log_x) for r in table.rows_between(L0, L1)]
    if extra:
        inner += [as_enclosure(p) for p in extra
                  if L0.hi.mpfr < as_enclosure(p).lo.mpfr < L1.lo.mpfr]
    inner.sort(key=lambda e: e.lo.mpfr)
    last = L0.hi.mpfr
    for p in inner:
        if p.lo.mpfr > last:
            pts.append(p)
            last = p.hi.mpfr
    pts.append(L1)
    return Partition(tuple(pts))


def pi_num_stitched(table: StepBoundTable, disc: AnchorDiscrepancy,
                    subdivisions, prec: int | None = None) -> XReal:
    """Bound valid for all x >= x1: the max of eps_pi over consecutive
    subdivision intervals of [log x1, infinity); the last interval uses the
    unbounded branch.

    ``subdivisions`` is a sequence of increasing log-scale points starting at
    log x1; the implicit final endpoint is infinity.
    """
    prec = prec or get_precision()
    pts = [as_enclosure(p) for p in subdivisions]
    if not pts:
        raise DomainError("need at least the starting point log x1")
    for p, q in zip(pts, pts[1:]):
        if not p.hi.mpfr < q.lo.mpfr:
            raise DomainError("subdivision points must be strictly increasing")
    best = None
    for i, start in enumerate(pts):
        end = pts[i + 1] if i + 1 < len(pts) else None
        part = default_partition(disc, table, start)
        v = pi_num_on_interval(table, part, disc, start, end, prec)
        if best is None or v.mpfr > best.mpfr:
            best = v
    return best


@dataclass
class DominanceReport:
    ok: bool
    violations: list
    rows_checked: int

    def __bool__(self):
        return self.ok


def dominates(table: StepBoundTable, bound: AsymptoticBound, log_range,
              grid_nodes: int = 2048, prec: int | None = None) -> DominanceReport:
    """Check the step table stays below the asymptotic curve on the range.

    Where the curve is certified decreasing, each row is compared at its own
    anchor point (the interpolation argument); on a non-decreasing prefix the
    comparison runs on a grid with enclosure widening.  Violations are
    reported, not raised.
    """
    prec = prec or get_precision()
    lo, hi = (as_enclosure(log_range[0]), as_enclosure(log_range[1]))
    if lo.lo.mpfr > hi.hi.mpfr:
        return DominanceReport(True, [], 0)
    threshold = curve_decreasing_threshold(bound)
    violations = []
    checked = 0
    for row in table.rows:
        if row.log_x.mpfr < lo.lo.mpfr or row.log_x.mpfr > hi.hi.mpfr:
            continue
        checked += 1
        curve = eval_asymp(bound, Enclosure.from_endpoints(row.log_x, row.log_x), prec)
        if not row.eps.mpfr <= curve.lo.mpfr:
            violations.append((row.log_x_text, row.eps_text,
                               float(curve.lo.mpfr), "row above curve"))
    # Non-decreasing prefix: sample the curve on a grid and compare the step
    # function pointwise (the curve minimum there is not at row anchors).
    if threshold.hi.mpfr > lo.lo.mpfr:
        top = min(float(threshold.hi.mpfr), float(hi.hi.mpfr))
        bot = float(lo.lo.mpfr)
        n = min(grid_nodes, 10_000)
        for k in range(n + 1):
            g = bot + (top - bot) * k / n
            try:
                step_val = table.eval_step(as_enclosure(Fraction(g).limit_denominator(1 << 40)))
            except BelowTable:
                continue
            curve = eval_asymp(bound, Fraction(g).limit_denominator(1 << 40), prec)
            checked += 1
            if not step_val.mpfr <= curve.lo.mpfr:
                violations.append((f"{g:.6g}", str(step_val.mpfr),
                                   float(curve.lo.mpfr), "grid point above curve"))
    return DominanceReport(not violations, violations, checked)
