"""Structural figure checks — layout, styles, metadata — never pixels."""

import csv
import importlib.util
import json
import subprocess
import sys

import pytest

from pointfig import (PlotJob, SchemaMismatch, build_figure,
                      png_text_chunks, render)

CONJ_HEADER = ["a", "n", "value_const", "deriv_const", "mismatch",
               "window_drift", "ratio_vs_coarser"]


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def conjecture_csv(tmp_path):
    rows = []
    for i, a in enumerate((1e-2, 1e-3)):
        for n in range(4):
            rows.append([a, n, 0.5 + 0.1 * n + 0.01 * i,
                         0.5 + 0.1 * n, 1e-4 / (i + 1), 2e-5, ""])
    return write_csv(tmp_path / "conjecture1.csv", CONJ_HEADER, rows)


def series_lines(ax):
    return [ln for ln in ax.get_lines() if ln.get_label().startswith("a=")]


def test_conjecture_four_panel_structure(conjecture_csv, tmp_path):
    job = PlotJob(inputs=(conjecture_csv,), out_path=str(tmp_path / "f.png"))
    fig, kind, digest = build_figure(job)
    assert kind == "conjecture"
    panels = [ax for ax in fig.axes if ax.get_visible()]
    assert len(panels) == 4
    for ax in panels:
        lines = series_lines(ax)
        assert len(lines) == 2  # one per range value
        styles = {ln.get_label(): ln.get_linestyle() for ln in lines}
        assert styles == {"a=0.01": "--", "a=0.001": "-"}
    assert len(digest) == 64


def test_single_order_degrades_to_one_panel(tmp_path):
    path = write_csv(tmp_path / "conjecture1.csv", CONJ_HEADER,
                     [[1e-2, 0, 0.5, 0.49, 1e-2, 1e-3, ""]])
    fig, _, _ = build_figure(PlotJob(inputs=(path,),
                                     out_path=str(tmp_path / "f.png")))
    assert len([ax for ax in fig.axes if ax.get_visible()]) == 1


def test_png_metadata_carries_payload_digest(conjecture_csv, tmp_path):
    out = str(tmp_path / "fig.png")
    job = PlotJob(inputs=(conjecture_csv,), out_path=out)
    _, _, digest = build_figure(job)
    render(job)
    meta = png_text_chunks(out)
    assert meta["pointfig-payload-sha256"] == digest
    assert meta["pointfig-schema"] == "conjecture"


def test_digest_tracks_the_data(conjecture_csv, tmp_path):
    job = PlotJob(inputs=(conjecture_csv,), out_path=str(tmp_path / "a.png"))
    _, _, d1 = build_figure(job)
    rows = list(csv.reader(open(conjecture_csv, newline="")))
    rows[1][2] = "0.777"  # nudge one plotted value
    write_csv(conjecture_csv, rows[0], rows[1:])
    _, _, d2 = build_figure(job)
    assert d1 != d2


def test_render_is_deterministic(conjecture_csv, tmp_path):
    p1, p2 = str(tmp_path / "one.png"), str(tmp_path / "two.png")
    render(PlotJob(inputs=(conjecture_csv,), out_path=p1))
    render(PlotJob(inputs=(conjecture_csv,), out_path=p2))
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_schema_gates(tmp_path):
    with pytest.raises(SchemaMismatch):
        PlotJob(inputs=(str(tmp_path / "missing.csv"),),
                out_path=str(tmp_path / "f.png"))
    bad = write_csv(tmp_path / "bad.csv", ["x", "y"], [[1, 2]])
    with pytest.raises(SchemaMismatch):
        build_figure(PlotJob(inputs=(bad,), out_path=str(tmp_path / "f.png")))
    conj = write_csv(tmp_path / "c.csv", CONJ_HEADER,
                     [[1e-2, 0, 0.5, 0.49, 1e-2, 1e-3, ""]])
    with pytest.raises(SchemaMismatch):  # PNG-only target
        PlotJob(inputs=(conj,), out_path=str(tmp_path / "f.pdf"))
    empty = write_csv(tmp_path / "e.csv", CONJ_HEADER, [])
    with pytest.raises(SchemaMismatch):
        build_figure(PlotJob(inputs=(empty,),
                             out_path=str(tmp_path / "f.png")))


def test_mixed_kinds_rejected(tmp_path):
    conj = write_csv(tmp_path / "c.csv", CONJ_HEADER,
                     [[1e-2, 0, 0.5, 0.49, 1e-2, 1e-3, ""]])
    sweep = write_csv(tmp_path / "s.csv",
                      ["a", "beta_eff", "abs_error", "fitted_order", "error"],
                      [[1e-2, 0.5, 1e-3, 1.0, ""]])
    with pytest.raises(SchemaMismatch):
        build_figure(PlotJob(inputs=(conj,), overlays=(sweep,),
                             out_path=str(tmp_path / "f.png")))


SWEEP_HEADER = ["a", "beta_eff", "abs_error", "fitted_order", "error"]


def test_sweep_loglog_with_slope_annotation(tmp_path):
    path = write_csv(tmp_path / "theorem1_sweep.csv", SWEEP_HEADER,
                     [[1e-1, 0.55, 5e-2, 0.9, ""],
                      [1e-2, 0.505, 5e-3, 1.01, ""],
                      [1e-3, 0.5005, 5e-4, 1.03, ""]])
    fig, kind, _ = build_figure(PlotJob(inputs=(path,),
                                        out_path=str(tmp_path / "f.png")))
    assert kind == "sweep"
    (ax,) = fig.axes
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    assert len(ax.get_lines()) == 1
    notes = [t.get_text() for t in ax.texts]
    assert any("fitted order ≈ 1.03" in t for t in notes)


def test_sweep_overlay_adds_series(tmp_path):
    rows = [[1e-1, 0.55, 5e-2, 0.9, ""], [1e-2, 0.505, 5e-3, 1.0, ""]]
    main = write_csv(tmp_path / "m.csv", SWEEP_HEADER, rows)
    over = write_csv(tmp_path / "o.csv", SWEEP_HEADER, rows)
    fig, _, _ = build_figure(PlotJob(inputs=(main,), overlays=(over,),
                                     out_path=str(tmp_path / "f.png")))
    assert len(fig.axes[0].get_lines()) == 2
    # failed rows are dropped, not drawn
    allbad = write_csv(tmp_path / "b.csv", SWEEP_HEADER,
                       [[1e-1, "nan", "nan", "nan", "no free region"]])
    with pytest.raises(SchemaMismatch):
        build_figure(PlotJob(inputs=(allbad,),
                             out_path=str(tmp_path / "f.png")))


def test_divergence_panel_and_fit_note(tmp_path):
    path = write_csv(tmp_path / "divergence_audit.csv",
                     ["a", "e1_beta2", "e2_sing", "e2_full"],
                     [[0.02, 0.55, -0.54, -0.6],
                      [0.01, 1.10, -1.09, -1.2],
                      [0.005, 2.19, -2.18, -2.3]])
    (tmp_path / "divergence_audit.json").write_text(json.dumps(
        {"fit": {"c1": 0.011, "c2": -0.0109, "c1_plus_c2": 1e-4,
                 "analytic_c1": 0.011, "c1_vs_analytic": 2e-4}}))
    fig, kind, _ = build_figure(PlotJob(inputs=(path,),
                                        out_path=str(tmp_path / "f.png")))
    assert kind == "divergence"
    (ax,) = fig.axes
    assert len(ax.get_lines()) == 2
    assert any("pole sum" in t.get_text() for t in ax.texts)


def test_bethe_curve_with_fit_overlay(tmp_path):
    path = write_csv(tmp_path / "bethe_fit.csv",
                     ["c", "E_over_L", "residual"],
                     [[100.0, 3.16, 1e-14], [1000.0, 3.276, 1e-14],
                      [10000.0, 3.2885, 1e-14]])
    (tmp_path / "bethe_fit.json").write_text(json.dumps(
        {"fit": {"e0": 3.289, "p": -3.999, "q": 11.95}}))
    fig, kind, _ = build_figure(PlotJob(inputs=(path,),
                                        out_path=str(tmp_path / "f.png")))
    assert kind == "bethe"
    (ax,) = fig.axes
    assert len(ax.get_lines()) == 2  # data and fit curve
    labels = [ln.get_label() for ln in ax.get_lines()]
    assert any("p=-3.999" in lb for lb in labels)


def test_cli_exit_codes(conjecture_csv, tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "pointfig.render", conjecture_csv,
         "-o", str(tmp_path / "fig.png")],
        capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip().endswith("fig.png")
    out = subprocess.run(
        [sys.executable, "-m", "pointfig.render", conjecture_csv,
         "-o", str(tmp_path / "fig.pdf")],
        capture_output=True, text=True)
    assert out.returncode == 2
    assert "error:" in out.stderr


@pytest.mark.skipif(importlib.util.find_spec("pointjump") is None,
                    reason="producer package not installed")
def test_end_to_end_from_producer_artifacts(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "pointjump.cli", "conjecture1",
         "--n-outer", "30000", "--out-dir", str(tmp_path)],
        capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    png = str(tmp_path / "fig.png")
    job = PlotJob(inputs=(str(tmp_path / "conjecture1.csv"),), out_path=png)
    fig, _, digest = build_figure(job)
    assert len([ax for ax in fig.axes if ax.get_visible()]) == 4
    render(job)
    assert png_text_chunks(png)["pointfig-payload-sha256"] == digest
