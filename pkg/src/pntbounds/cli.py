"""Command-line front end: conversions, verification, regeneration.

Values print with their rounding direction; exit status is 0 on
success/verified, 1 when a verification finds a violation, 2 on usage
errors.  All x-like inputs are natural logs (--log-x*), never raw huge
decimals.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import xreal
from .bounds import DEFAULT_R, AsymptoticBound, eval_asymp, to_plain_form
from .convert import (
    DEFAULT_GAP_COEFFICIENTS,
    GapCoefficients,
    anchor_discrepancy,
    default_partition,
    dominates,
    mu_asymp,
    mu_num,
    pi_num_on_interval,
    psi_to_pi_asymp,
    psi_to_theta_asymp,
    psi_to_theta_num,
    theta_to_pi_asymp,
)
from .errors import PntBoundsError
from .xreal import DOWN, UP, Enclosure, format_decimal


def _fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def _show(label: str, enc: Enclosure, digits: int = 8) -> None:
    print(f"{label}: <= {format_decimal(enc.hi, digits, UP)} (up), "
          f">= {format_decimal(enc.lo, digits, DOWN)} (down)")


def _bound_from_args(args, kind: str) -> AsymptoticBound:
    return AsymptoticBound.make(
        kind, args.A, _fraction(args.B), args.C, args.R,
        log_x0=args.log_x0 if getattr(args, "log_x0", None) else None,
    )


def _gap_coefficients(args) -> GapCoefficients:
    if args.a1 is None and args.a2 is None:
        return DEFAULT_GAP_COEFFICIENTS
    if args.a1 is None or args.a2 is None:
        raise PntBoundsError("supply both --a1 and --a2 (or neither)")
    return GapCoefficients(
        Enclosure.from_decimal(args.a1),
        Enclosure.from_decimal(args.a2),
        Enclosure.from_decimal(args.a_valid_from),
        provenance="command line",
    )


def _anchor(args):
    from .tables import load_anchors_text, packaged_anchors

    name = args.anchor
    if name in (None, "1e15", "anchor-1e15"):
        return packaged_anchors()["anchor-1e15"]
    if name == "crossing":
        from .sieve import crossing_anchor

        return crossing_anchor()
    with open(name, "r", encoding="utf-8") as fh:
        anchors = load_anchors_text(fh.read())
    if len(anchors) == 1:
        return next(iter(anchors.values()))
    if args.anchor_name and args.anchor_name in anchors:
        return anchors[args.anchor_name]
    raise PntBoundsError(
        f"anchor file has {sorted(anchors)}; pick one with --anchor-name")


def _theta_table(args):
    from .tables import load_table, packaged_table

    if getattr(args, "theta_table", None):
        return load_table(args.theta_table)
    return packaged_table("theta")


def cmd_eval(args) -> int:
    if args.what == "asymp":
        if not (args.A and args.B and args.C):
            raise PntBoundsError("eval asymp needs --A, --B and --C")
        bound = _bound_from_args(args, "pi")
        _show(f"eps_asymp(log x = {args.log_x})", eval_asymp(bound, args.log_x))
        if args.plain:
            ap, B, cp = to_plain_form(bound)
            print(f"plain form: A' <= {format_decimal(ap, 8, UP)} (up), B = {B}, "
                  f"C' >= {format_decimal(cp, 10, DOWN)} (down)")
    else:
        table = _theta_table(args)
        eps = table.eval_step(Enclosure.from_decimal(args.log_x))
        print(f"eps_num(log x = {args.log_x}) <= {format_decimal(eps, 8, UP)} (up)")
    return 0


def cmd_convert_asymp(args) -> int:
    if args.route == "psi-to-theta":
        psi = _bound_from_args(args, "psi")
        out = psi_to_theta_asymp(psi, _gap_coefficients(args))
        _show("A_theta", out.A)
    elif args.route == "theta-to-pi":
        theta = _bound_from_args(args, "theta")
        disc = anchor_discrepancy(_anchor(args))
        out = theta_to_pi_asymp(theta, disc, args.log_x1)
        _show("A_pi", out.A)
        print(f"valid for log x >= {args.log_x1}")
    else:
        psi = _bound_from_args(args, "psi")
        disc = anchor_discrepancy(_anchor(args))
        out = psi_to_pi_asymp(psi, _gap_coefficients(args), disc, args.log_x1)
        _show("A_pi", out.A)
        print(f"valid for log x >= {args.log_x1}")
    return 0


def cmd_convert_num(args) -> int:
    res = psi_to_theta_num(args.eps_psi, args.log_x0)
    print(f"eps_theta <= {format_decimal(res.eps_theta, 8, UP)} (up)")
    print(f"one-sided: (theta(x)-x)/x <= {format_decimal(res.one_sided_upper, 8, UP)}")
    return 0


def cmd_mu(args) -> int:
    disc = anchor_discrepancy(_anchor(args))
    if args.flavor == "asymp":
        theta = _bound_from_args(args, "theta")
        _show("mu_asymp", mu_asymp(theta, disc, args.log_x1))
    else:
        table = _theta_table(args)
        lx2 = None if args.log_x2 in (None, "inf") else args.log_x2
        part = default_partition(disc, table, args.log_x1)
        mu = mu_num(disc, table, part, args.log_x1, lx2)
        _show("mu_num", mu)
        eps = pi_num_on_interval(table, part, disc, args.log_x1, lx2)
        print(f"eps_pi on the interval <= {format_decimal(eps, 8, UP)} (up)")
    return 0


def cmd_verify_dominates(args) -> int:
    from .tables import load_table, packaged_table

    table = load_table(args.table) if args.table else packaged_table("pi")
    bound = _bound_from_args(args, "pi")
    rep = dominates(table, bound, (args.from_log_x, args.to_log_x))
    print(f"checked {rep.rows_checked} points; "
          f"{'dominated' if rep.ok else f'{len(rep.violations)} violation(s)'}")
    for v in rep.violations[:20]:
        print(f"  at log x = {v[0]}: step {v[1]} vs curve {v[2]:.6g} ({v[3]})")
    return 0 if rep.ok else 1


def cmd_verify_weak(args) -> int:
    import numpy as np

    from .sieve import PrimeStore, buthe_envelope, envelope_decreasing_on_grid, verify_pointwise

    store = PrimeStore(limit=int(float(args.limit)))
    coeff = float(args.coeff)
    rep = verify_pointwise(store, "pi", lambda logs: np.full_like(logs, coeff),
                           x_max=store.limit)
    env97 = buthe_envelope(Enclosure.exact(97).log())
    env_ok = float(env97.mpfr) <= coeff
    mono = envelope_decreasing_on_grid(Enclosure.exact(97).log(), "43.75", nodes=args.nodes)
    print(f"prime gaps to {store.limit}: {len(rep.violations)} violation(s); "
          f"max ratio {rep.max_ratio:.6f} at x = {rep.max_ratio_at:.0f}")
    print(f"envelope(97) <= {format_decimal(env97, 6, UP)} "
          f"({'ok' if env_ok else 'EXCEEDS'} {coeff}); "
          f"decreasing on grid: {mono}")
    return 0 if rep.ok and env_ok and mono else 1


def cmd_regenerate(args) -> int:
    from .tables import (
        DEFAULT_THETA_CURVE,
        Report,
        emit_report,
        format_table,
        packaged_table,
        regenerate_pi_table,
    )

    theta = _theta_table(args)
    anchor = _anchor(args)
    compare = packaged_table("pi") if args.compare else None
    rows = args.rows.split(",") if args.rows else None
    augment = None if args.no_augment else DEFAULT_THETA_CURVE
    out, entries = regenerate_pi_table(theta, anchor, args.refinement, rows,
                                       augment, compare)
    rep = Report("pi step-table regeneration")
    for e in entries:
        rep.add(e.line())
        if e.ratio is not None and not (0.99 <= e.ratio <= 1.001):
            rep.ok = False
    rep.summary["rows"] = [
        {"log_x": e.log_x_text, "value": format_decimal(e.regenerated, 6, UP),
         "printed": e.printed, "ratio": e.ratio}
        for e in entries
    ]
    code = emit_report(rep, summary_path=args.summary)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_table(out))
    return code


def cmd_crossing(args) -> int:
    from .sieve import crossing_point

    enc = crossing_point()
    print(f"crossing point in [{format_decimal(enc.lo, 14, DOWN)}, "
          f"{format_decimal(enc.hi, 14, UP)}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pntbounds",
        description="Certified conversions between explicit prime-counting "
                    "error bounds (psi/theta/pi).",
    )
    p.add_argument("--precision", type=int, default=None,
                   help="working precision in bits (default 192, env PNTBOUNDS_PRECISION)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_curve(sp, with_x0=False):
        sp.add_argument("--A", required=True)
        sp.add_argument("--B", required=True, help="rational, e.g. 3/2 or 1.503")
        sp.add_argument("--C", required=True)
        sp.add_argument("--R", default=DEFAULT_R)
        if with_x0:
            sp.add_argument("--log-x0", dest="log_x0", default=None)

    def add_anchor(sp):
        sp.add_argument("--anchor", default="1e15",
                        help="'1e15', 'crossing', or an anchor-file path")
        sp.add_argument("--anchor-name", default=None)

    def add_gap(sp):
        sp.add_argument("--a1", default=None)
        sp.add_argument("--a2", default=None)
        sp.add_argument("--a-valid-from", default="30")

    sp = sub.add_parser("eval", help="evaluate a bound curve or step table")
    sp.add_argument("what", choices=["asymp", "step"])
    sp.add_argument("--log-x", dest="log_x", required=True)
    sp.add_argument("--plain", action="store_true", help="also print the plain form")
    sp.add_argument("--A")
    sp.add_argument("--B")
    sp.add_argument("--C")
    sp.add_argument("--R", default=DEFAULT_R)
    sp.add_argument("--log-x0", dest="log_x0", default=None)
    sp.add_argument("--table", dest="theta_table", default=None)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("convert-asymp", help="convert an asymptotic bound")
    sp.add_argument("route", choices=["psi-to-theta", "theta-to-pi", "psi-to-pi"])
    add_curve(sp, with_x0=True)
    add_anchor(sp)
    add_gap(sp)
    sp.add_argument("--log-x1", dest="log_x1", default=None)
    sp.set_defaults(func=cmd_convert_asymp)

    sp = sub.add_parser("convert-num", help="numerical psi -> theta step value")
    sp.add_argument("--eps-psi", dest="eps_psi", required=True)
    sp.add_argument("--log-x0", dest="log_x0", required=True)
    sp.set_defaults(func=cmd_convert_num)

    sp = sub.add_parser("mu", help="overhead factors mu (asymp or num)")
    sp.add_argument("flavor", choices=["asymp", "num"])
    sp.add_argument("--A")
    sp.add_argument("--B", default="3/2")
    sp.add_argument("--C")
    sp.add_argument("--R", default=DEFAULT_R)
    sp.add_argument("--log-x0", dest="log_x0", default=None)
    add_anchor(sp)
    sp.add_argument("--theta-table", dest="theta_table", default=None)
    sp.add_argument("--log-x1", dest="log_x1", required=True)
    sp.add_argument("--log-x2", dest="log_x2", default=None, help="number or 'inf'")
    sp.set_defaults(func=cmd_mu)

    sp = sub.add_parser("verify-dominates",
                        help="step table below an asymptotic curve?")
    add_curve(sp)
    sp.add_argument("--table", default=None, help="pi step-table path (default: shipped)")
    sp.add_argument("--from-log-x", dest="from_log_x", default="0.6931471805599453")
    sp.add_argument("--to-log-x", dest="to_log_x", default="20000")
    sp.set_defaults(func=cmd_verify_dominates)

    sp = sub.add_parser("verify-weak",
                        help="coeff * x/log x bound over desk-scale prime gaps")
    sp.add_argument("--limit", default="1e8")
    sp.add_argument("--coeff", default="0.4298")
    sp.add_argument("--nodes", type=int, default=10_000)
    sp.set_defaults(func=cmd_verify_weak)

    sp = sub.add_parser("regenerate", help="rebuild pi table rows from theta rows")
    add_anchor(sp)
    sp.add_argument("--theta-table", dest="theta_table", default=None)
    sp.add_argument("--rows", default=None, help="comma-separated log-x targets")
    sp.add_argument("--refinement", type=int, default=50)
    sp.add_argument("--no-augment", action="store_true",
                    help="disable refinement by the admissible theta curve")
    sp.add_argument("--compare", action="store_true", default=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--summary", default=None, help="write a JSON summary here")
    sp.set_defaults(func=cmd_regenerate)

    sp = sub.add_parser("crossing-point", help="enclose the anchor crossing point")
    sp.set_defaults(func=cmd_crossing)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision:
        xreal.set_precision(args.precision)
    try:
        return args.func(args)
    except PntBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
