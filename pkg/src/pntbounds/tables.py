"""Table and anchor ingestion, pi-table regeneration, comparison reports.

File format: ``#``-prefixed ``key = value`` header lines, then one CSV row
per line (``log_x,eps[,provenance]``).  Values are re-rounded upward on
ingestion so a table read from disk is always safe to use as a bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .bounds import (
    AsymptoticBound,
    ExactAnchor,
    StepBoundTable,
    StepRow,
    curve_decreasing_threshold,
    eval_asymp,
)
from .convert import AnchorDiscrepancy, anchor_discrepancy
from .errors import EmptyTable, OrderError, ParseError
from .special import as_enclosure, j_integral
from .xreal import DOWN, UP, Enclosure, XReal, format_decimal, get_precision

# The shipped theta curve admissible for every x >= 2, used to refine coarse
# step-table gaps during regeneration (minimum of two admissible bounds).
DEFAULT_THETA_CURVE = AsymptoticBound.make(
    "theta", "121.0961", Fraction(3, 2), 2, "5.5666305", log_x0="0.6931471805"
)


def _parse_headers(lines):
    headers = {}
    for idx, line in enumerate(lines, start=1):
        text = line.strip()
        if not text.startswith("#"):
            continue
        body = text.lstrip("#").strip()
        if "=" in body:
            key, _, val = body.partition("=")
            headers[key.strip()] = val.strip()
    return headers


def load_table_text(text: str) -> StepBoundTable:
    lines = text.splitlines()
    headers = _parse_headers(lines)
    kind = headers.get("kind", "theta")
    provenance = headers.get("provenance", "")
    rows = []
    prev_key = None
    for idx, line in enumerate(lines, start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        parts = [p.strip() for p in body.split(",")]
        if len(parts) < 2:
            raise ParseError(f"expected 'log_x,eps[,provenance]', got {body!r}", idx)
        lx_text, eps_text = parts[0], parts[1]
        prov = parts[2] if len(parts) > 2 else ""
        try:
            lx = XReal.from_decimal(lx_text, UP)
            eps = XReal.from_decimal(eps_text, UP)
        except (ValueError, ArithmeticError) as exc:
            raise ParseError(f"bad number ({exc})", idx) from None
        if prev_key is not None and not prev_key < lx.mpfr:
            raise OrderError("rows are not strictly increasing in log x", idx)
        prev_key = lx.mpfr
        rows.append(StepRow(lx, eps, lx_text, eps_text, prov))
    if not rows:
        raise EmptyTable("no data rows")
    return StepBoundTable(kind, rows, provenance)


def load_table(path) -> StepBoundTable:
    with open(path, "r", encoding="utf-8") as fh:
        return load_table_text(fh.read())


def format_table(table: StepBoundTable) -> str:
    lines = [f"# kind = {table.kind}"]
    if table.provenance:
        lines.append(f"# provenance = {table.provenance}")
    lines.append("# columns = log_x,eps,provenance")
    for r in table.rows:
        lines.append(f"{r.log_x_text},{r.eps_text},{r.provenance}")
    return "\n".join(lines) + "\n"


def _packaged(name: str) -> str:
    return resources.files("pntbounds.data").joinpath(name).read_text()


def packaged_table(name: str) -> StepBoundTable:
    """Shipped tables: 'theta', 'psi' or 'pi'."""
    return load_table_text(_packaged(f"{name}_num.csv"))


def load_anchors_text(text: str) -> dict[str, ExactAnchor]:
    anchors = {}
    current: dict | None = None
    name = None

    def finish():
        nonlocal current, name
        if current is None:
            return
        missing = {"x0", "pi", "theta_lo", "theta_hi", "li_lo", "li_hi"} - set(current)
        if missing:
            raise ParseError(f"anchor {name!r} missing keys {sorted(missing)}")
        anchors[name] = ExactAnchor(
            x0=Fraction(current["x0"]),
            pi_x0=int(current["pi"]),
            theta_x0=Enclosure(
                XReal.from_decimal(current["theta_lo"], DOWN),
                XReal.from_decimal(current["theta_hi"], UP),
            ),
            li_x0=Enclosure(
                XReal.from_decimal(current["li_lo"], DOWN),
                XReal.from_decimal(current["li_hi"], UP),
            ),
            provenance=current.get("provenance", ""),
            oracle_verifiable=current.get("oracle_verifiable", "false") == "true",
        )
        current = None

    for idx, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        if body.startswith("[") and body.endswith("]"):
            finish()
            name = body[1:-1]
            current = {}
            continue
        if current is None or "=" not in body:
            raise ParseError(f"unexpected line {body!r}", idx)
        key, _, val = body.partition("=")
        current[key.strip()] = val.strip()
    finish()
    if not anchors:
        raise EmptyTable("no anchors")
    return anchors


def packaged_anchors() -> dict[str, ExactAnchor]:
    return load_anchors_text(_packaged("anchors.txt"))


def anchor_1e15() -> ExactAnchor:
    return packaged_anchors()["anchor-1e15"]


@dataclass
class InterpRow:
    log_x: str
    eps_asymp: str
    eps_num_inf: str


def packaged_interp_rows() -> list[InterpRow]:
    rows = []
    for idx, line in enumerate(_packaged("pi_interp.csv").splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 3:
            raise ParseError("expected 'log_x,eps_asymp,eps_num_inf'", idx)
        rows.append(InterpRow(*parts))
    return rows


# ---------------------------------------------------------------------------
# Regeneration
# ---------------------------------------------------------------------------


def _admissible_eps(table: StepBoundTable, curve: AsymptoticBound | None,
                    curve_floor: float, point: Enclosure, prec) -> Enclosure:
    """min(step value, decreasing asymptotic curve value): both admissible."""
    eps = as_enclosure(table.eval_step(point))
    if curve is not None and float(point.lo.mpfr) >= curve_floor:
        eps = eps.min_with(eval_asymp(curve, point, prec))
    return eps


def _march_points(table, log_x1: float, span: float, refinement: int,
                  needs_split) -> list[float]:
    """Grid over [log_x1 - span, log_x1]: table rows, with refinement-fold
    subdivision only of gaps where the augmenting curve can undercut the
    step value (elsewhere subdividing changes nothing)."""
    lo = log_x1 - span
    anchors = [lo] + [float(r.log_x.mpfr) for r in table.rows
                      if lo < float(r.log_x.mpfr) < log_x1] + [log_x1]
    pts = []
    for a, b in zip(anchors, anchors[1:]):
        gap = b - a
        n = 1
        if needs_split(a, b):
            n = max(1, min(int(refinement), int(gap / 0.02) + 1))
            if gap > 1:
                n = max(n, int(gap))
        for k in range(n):
            pts.append(a + gap * k / n)
    pts.append(log_x1)
    return pts


def regenerate_row(table: StepBoundTable, disc: AnchorDiscrepancy, log_x1,
                   refinement: int = 50, augment: AsymptoticBound | None = None,
                   prec: int | None = None) -> XReal:
    """Certified bound for all x >= e^log_x1: the stitched maximum over a
    fine subdivision of [log x1, infinity), with the partition sum maintained
    incrementally while marching.

    ``augment`` (an admissible theta curve) refines coarse step-table gaps:
    the pointwise minimum of two admissible bounds is admissible, which is
    essential where the published rows are widely spaced.
    """
    prec = prec or get_precision()
    L1f = float(as_enclosure(log_x1).lo.mpfr)
    curve_floor = float("inf")
    if augment is not None:
        thr = curve_decreasing_threshold(augment)
        curve_floor = max(float(thr.hi.mpfr), float(augment.log_x0.hi.mpfr))

    def eps_at(pt: Enclosure) -> Enclosure:
        return _admissible_eps(table, augment, curve_floor, pt, prec)

    def needs_split(a: float, b: float) -> bool:
        # the curve can only matter inside a gap if its (decreasing) value at
        # the right end undercuts the step value holding on the gap
        if augment is None or b <= curve_floor:
            return False
        step_val = float(table.eval_step(as_enclosure(Fraction(a))).mpfr)
        curve_val = float(eval_asymp(augment, Fraction(b), prec).lo.mpfr)
        return curve_val < step_val

    L0 = disc.log_x0
    L0f = float(L0.lo.mpfr)
    span = min(L1f - L0f, 0.75 * prec + 80)

    # Partition sum S = sum eps_i J(b_i, b_{i+1}, s=a) for the current
    # frontier a, kept as one enclosure and rescaled by e^-delta on advance.
    S = Enclosure.exact(0)
    if span < L1f - L0f:
        # crude certified bound on everything below the marched span
        cutE = Enclosure.exact(Fraction(L1f - span))
        head = (cutE - Enclosure.exact(Fraction(L1f))).exp(prec) / (L0 * L0)
        S = Enclosure.from_endpoints(0, (as_enclosure(table.eval_step(L0)) * head).hi)
        pts = _march_points(table, L1f, span, refinement, needs_split)
    else:
        pts = [L0f] + _march_points(table, L1f, span, refinement, needs_split)[1:]

    pts = sorted(set(pts))
    cur = Enclosure.exact(Fraction(pts[0])) if pts[0] != L0f else L0
    for nxt_f in pts[1:]:
        nxt = Enclosure.exact(Fraction(nxt_f))
        S = S * (cur - nxt).exp(prec) + eps_at(cur) * j_integral(cur, nxt, nxt, prec)
        cur = nxt

    # March over [log x1, infinity): finite-branch interval values with a
    # budget-based step schedule (fine while candidates are near the running
    # max); the unbounded-branch frontier value certifies the tail when folded.
    best = None
    a = cur
    fine = Fraction(1, max(4, refinement))
    rows_ahead = [float(r.log_x.mpfr) for r in table.rows
                  if float(r.log_x.mpfr) > L1f + 1e-9]

    def frontier_values(a, S):
        eps_a = eps_at(a)
        base = 1 + (L0 - a).exp(prec) * (a / L0) / eps_a * disc.value \
             + a * S / eps_a
        v_inf = (eps_a * (base + 1 / (a + a.log(prec) - 1))).hi
        return eps_a, base, v_inf

    rows_crossed = 0
    steps = 0
    while True:
        af = float(a.lo.mpfr)
        eps_a, base, v_inf = frontier_values(a, S)
        if best is not None and v_inf.mpfr <= best.mpfr * (1 + 2 ** -20):
            return best if best.mpfr >= v_inf.mpfr else v_inf
        steps += 1
        if af > L1f + 2500 or rows_crossed > 40 or steps > 3000:
            return v_inf if best is None or v_inf.mpfr > best.mpfr else best
        # Step size from the tail-term budget: a finite-branch candidate adds
        # roughly step/a, so keep that below the headroom to the running max.
        if best is None:
            step = float(fine)
        else:
            head = float(best.mpfr) / float(eps_a.hi.mpfr) - float(base.hi.mpfr)
            step = float(fine) if head <= 0 else min(1.0, max(float(fine),
                                                              0.8 * head * af))
        nxt_row = next((r for r in rows_ahead if r > af + 1e-12), None)
        if nxt_row is not None and best is not None \
                and float(eps_a.hi.mpfr) * 1.2 < float(best.mpfr):
            # deep below the running max: skip straight to the next drop
            step = nxt_row - af
        if nxt_row is not None and af + step >= nxt_row - 1e-12:
            b = Enclosure.exact(Fraction(nxt_row))
            rows_crossed += 1
        else:
            b = Enclosure.exact(Fraction(af + step))
        jv = j_integral(a, b, b, prec)
        v = (eps_a * (base + b * jv)).hi
        if best is None or v.mpfr > best.mpfr:
            best = v
        S = S * (a - b).exp(prec) + eps_a * jv
        a = b


@dataclass
class RegenEntry:
    log_x_text: str
    regenerated: XReal
    printed: str | None
    ratio: float | None

    def line(self) -> str:
        val = format_decimal(self.regenerated, 5, UP)
        if self.printed is None:
            return f"{self.log_x_text}: {val} (up)"
        return (f"{self.log_x_text}: regenerated {val} (up), printed {self.printed}, "
                f"ratio {self.ratio:.6f}")


def regenerate_pi_table(theta_table: StepBoundTable, anchor: ExactAnchor,
                        refinement: int = 50, rows=None,
                        augment: AsymptoticBound | None = DEFAULT_THETA_CURVE,
                        compare: StepBoundTable | None = None,
                        prec: int | None = None):
    """Rebuild pi step-table rows from the theta table and an exact anchor.

    Returns (StepBoundTable of regenerated rows, list of RegenEntry).
    ``rows`` selects target log-x values (defaults to the comparison table's
    rows, or the theta table's rows at or past the anchor).
    """
    prec = prec or get_precision()
    disc = anchor_discrepancy(anchor, prec)
    if rows is None:
        src = compare.rows if compare is not None else theta_table.rows
        rows = [r.log_x_text for r in src]
    printed = {}
    if compare is not None:
        printed = {r.log_x_text: r for r in compare.rows}
    entries = []
    pairs = []
    for target in rows:
        v = regenerate_row(theta_table, disc, as_enclosure(str(target)),
                           refinement, augment, prec)
        text = format_decimal(v, 5, UP)
        ref = printed.get(str(target))
        ratio = None
        if ref is not None:
            ratio = float(v.mpfr / ref.eps.mpfr)
        entries.append(RegenEntry(str(target), v, ref.eps_text if ref else None, ratio))
        pairs.append((str(target), text, "regenerated"))
    out = StepBoundTable.from_pairs("pi", pairs,
                                    provenance=f"regenerated (refinement={refinement})")
    return out, entries


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class Report:
    title: str
    lines: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    ok: bool = True

    def add(self, text: str):
        self.lines.append(text)

    def text(self) -> str:
        out = [self.title, "-" * len(self.title)]
        out += self.lines
        out.append(f"status: {'ok' if self.ok else 'VIOLATION'}")
        return "\n".join(out) + "\n"

    def json(self) -> str:
        return json.dumps({"title": self.title, "ok": self.ok, **self.summary},
                          indent=2, sort_keys=True)


def emit_report(report: Report, stream=None, summary_path=None) -> int:
    """Print the report; nonzero return signals a violation to the CLI."""
    import sys

    stream = stream or sys.stdout
    stream.write(report.text())
    if summary_path:
        with open(summary_path, "w", encoding="utf-8") as fh:
            fh.write(report.json() + "\n")
    return 0 if report.ok else 1


def augment_theta_table(table: StepBoundTable, log_x1,
                        curve: AsymptoticBound | None = DEFAULT_THETA_CURVE,
                        prec: int | None = None) -> StepBoundTable:
    """Insert rows min(step value, admissible decreasing curve value) near
    log_x1, refining coarse published gaps.  Both inputs bound every
    x >= the row point, so the minimum is admissible there too."""
    prec = prec or get_precision()
    if curve is None:
        return table
    thr = curve_decreasing_threshold(curve)
    floor = max(float(thr.hi.mpfr), float(curve.log_x0.hi.mpfr))
    L1f = float(as_enclosure(log_x1).lo.mpfr)
    candidates = [L1f - k for k in range(0, 31)] + \
                 [L1f - 30 - 10 * j for j in range(1, 21)]
    first = float(table.rows[0].log_x.mpfr)
    extra = []
    for g in candidates:
        if g <= max(first, floor):
            continue
        gE = Enclosure.exact(Fraction(g))
        step_val = table.eval_step(gE)
        curve_val = eval_asymp(curve, gE, prec).hi
        if curve_val.mpfr < step_val.mpfr:
            extra.append((g, curve_val))
    if not extra:
        return table
    merged = {float(r.log_x.mpfr): r for r in table.rows}
    for g, v in extra:
        if g not in merged:
            merged[g] = StepRow(
                XReal.from_fraction(Fraction(g), UP), XReal(v.mpfr, UP),
                repr(g), format_decimal(v, 8, UP), "curve-refined")
    rows = [merged[k] for k in sorted(merged)]
    return StepBoundTable(table.kind, rows, table.provenance + " + curve refinement")


def interpolation_report(theta_table: StepBoundTable, anchor: ExactAnchor,
                         A_pi: str = "121.107", rows=None,
                         prec: int | None = None) -> Report:
    """Per-row comparison of the asymptotic pi curve against the printed
    sample and the unbounded-branch numerical values it interpolates."""
    from .convert import default_partition, pi_num_on_interval

    prec = prec or get_precision()
    bound = AsymptoticBound.make("pi", A_pi, Fraction(3, 2), 2)
    disc = anchor_discrepancy(anchor, prec)
    rep = Report("asymptotic curve vs numerical step values")
    rows_out = []
    selected = packaged_interp_rows()
    if rows is not None:
        rows = {str(r) for r in rows}
        selected = [r for r in selected if r.log_x in rows]
    for row in selected:
        L = as_enclosure(row.log_x)
        asymp = eval_asymp(bound, L, prec)
        refined = augment_theta_table(theta_table, L, prec=prec)
        part = default_partition(disc, refined, L)
        num = pi_num_on_interval(refined, part, disc, L, None, prec)
        printed_num = XReal.from_decimal(row.eps_num_inf, UP)
        # the verified claim: the printed numerical column sits below the
        # curve; our recomputation confirms it wherever the published rows
        # are fine enough to regenerate the printed value
        dominated = bool(printed_num.mpfr <= asymp.lo.mpfr)
        confirmed = bool(num.mpfr <= asymp.lo.mpfr)
        rep.ok = rep.ok and dominated
        rows_out.append({
            "log_x": row.log_x,
            "eps_asymp": format_decimal(asymp.hi, 6, UP),
            "eps_asymp_printed": row.eps_asymp,
            "eps_num_inf": format_decimal(num, 6, UP),
            "eps_num_inf_printed": row.eps_num_inf,
            "dominates": dominated,
            "recompute_confirms": confirmed,
        })
        rep.add(f"log x = {row.log_x}: asymp {rows_out[-1]['eps_asymp']} "
                f"(printed {row.eps_asymp}), num {rows_out[-1]['eps_num_inf']} "
                f"(printed {row.eps_num_inf}), dominance "
                f"{'ok' if dominated else 'FAIL'}"
                + ("" if confirmed else " (recomputation limited by published rows)"))
    rep.summary["rows"] = rows_out
    return rep
