"""Render pointjump CSV artifacts into figures.

One entry point, four recognized table schemas (matched on the exact CSV
header): the expansion-order panels, the jump-convergence sweep, the
pole-cancellation audit, and the rapidity-fit energy curve. Everything
drawn is lifted verbatim from the CSV and its JSON sidecar; a SHA-256 of
the consumed values goes into the PNG text metadata so any figure can be
checked against its inputs after the fact.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import struct
import sys
import zlib
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


class SchemaMismatch(Exception):
    """Input file missing, not a known table, or not a PNG target."""


SCHEMAS = {
    ("a", "n", "value_const", "deriv_const", "mismatch", "window_drift",
     "ratio_vs_coarser"): "conjecture",
    ("a", "beta_eff", "abs_error", "fitted_order", "error"): "sweep",
    ("a", "e1_beta2", "e2_sing", "e2_full"): "divergence",
    ("c", "E_over_L", "residual"): "bethe",
}


@dataclass(frozen=True)
class PlotJob:
    """What to read, where to draw it, and any label overrides."""

    inputs: tuple[str, ...]
    out_path: str
    overlays: tuple[str, ...] = ()
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "overlays", tuple(self.overlays))
        if not self.inputs:
            raise SchemaMismatch("need at least one input table")
        for path in self.inputs + self.overlays:
            if not os.path.isfile(path):
                raise SchemaMismatch(f"input file not found: {path}")
        if not self.out_path.endswith(".png"):
            raise SchemaMismatch(
                "output must be a .png (metadata checksum lives in PNG text)")


def _read_table(path: str) -> tuple[str, list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatch(f"{path} is empty")
        kind = SCHEMAS.get(header)
        if kind is None:
            raise SchemaMismatch(
                f"{path} header {list(header)} matches no known table")
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise SchemaMismatch(f"{path} has a header but no rows")
    return kind, rows


def _sidecar_fit(path: str) -> dict:
    stem, _ = os.path.splitext(path)
    try:
        with open(stem + ".json", encoding="utf-8") as fh:
            return json.load(fh).get("fit", {})
    except (FileNotFoundError, ValueError):
        return {}


def payload_digest(consumed: list[tuple[str, tuple[float, ...]]]) -> str:
    """SHA-256 over the plotted values, canonically formatted."""
    h = hashlib.sha256()
    for label, values in consumed:
        line = label + "|" + ",".join(format(v, ".17g") for v in values)
        h.update(line.encode("utf-8") + b"\n")
    return h.hexdigest()


def _style_for(a: float, a_all: list[float]) -> str:
    # widest range dashed, everything tighter plain
    return "--" if a == max(a_all) else "-"


def _render_conjecture(job: PlotJob, tables: list[tuple[str, list[dict]]]):
    # one panel per expansion order; per range a, the pair of window
    # constants drawn as a two-point line so matching shows as flatness
    points: dict[int, list[tuple[float, float, float]]] = {}
    for _, rows in tables:
        for r in rows:
            points.setdefault(int(float(r["n"])), []).append(
                (float(r["a"]), float(r["value_const"]),
                 float(r["deriv_const"])))
    ns = sorted(points)
    a_all = sorted({a for pts in points.values() for a, _, _ in pts},
                   reverse=True)
    nrow, ncol = (2, 2) if len(ns) == 4 else (1, len(ns))
    fig, axes = plt.subplots(nrow, ncol, figsize=(4.0 * ncol, 3.0 * nrow),
                             squeeze=False)
    consumed = []
    for ax, n in zip(axes.flat, ns):
        for a, value, deriv in sorted(points[n], reverse=True):
            idx = a_all.index(a)
            ax.plot([0, 1], [value, deriv], _style_for(a, a_all),
                    color=f"C{idx}", label=f"a={a:g}")
            ax.plot([0], [value], "o", color="tab:blue")
            ax.plot([1], [deriv], "o", color="tab:red")
            consumed.append((f"n={n} a={a:g}", (value, deriv)))
        ax.set_xticks([0, 1], ["value const", "slope const"])
        ax.set_xlim(-0.4, 1.4)
        ax.set_title(f"order n={n}")
    for ax in axes.flat[len(ns):]:
        ax.set_visible(False)
    axes.flat[0].legend(fontsize=8)
    fig.suptitle(job.title or "next-order value vs current-order slope")
    return fig, consumed


def _render_sweep(job: PlotJob, tables: list[tuple[str, list[dict]]]):
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    consumed = []
    for i, (path, rows) in enumerate(tables):
        ok = [r for r in rows if not r["error"]]
        if not ok:
            raise SchemaMismatch(f"{path} holds only failed sweep rows")
        a = [float(r["a"]) for r in ok]
        err = [float(r["abs_error"]) for r in ok]
        ax.loglog(a, err, "o-", color=f"C{i}",
                  label=os.path.basename(path))
        consumed.append((f"series {i}", tuple(a) + tuple(err)))
        if i == 0:
            order = float(ok[-1]["fitted_order"])
            ax.annotate(f"fitted order ≈ {order:.2f}",
                        xy=(0.05, 0.9), xycoords="axes fraction")
            consumed.append(("fitted_order", (order,)))
    ax.set_xlabel(job.xlabel or "range a")
    ax.set_ylabel(job.ylabel or "jump error")
    ax.set_title(job.title or "jump convergence")
    if len(tables) > 1:
        ax.legend(fontsize=8)
    return fig, consumed


def _render_divergence(job: PlotJob, tables: list[tuple[str, list[dict]]]):
    path, rows = tables[0]
    inv_a = [1.0 / float(r["a"]) for r in rows]
    e1 = [float(r["e1_beta2"]) for r in rows]
    neg_sing = [-float(r["e2_sing"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.plot(inv_a, e1, "o-", label="first order, strength²")
    ax.plot(inv_a, neg_sing, "s--", label="−(second order, singular)")
    consumed = [("e1_beta2", tuple(inv_a) + tuple(e1)),
                ("neg_e2_sing", tuple(neg_sing))]
    fit = _sidecar_fit(path)
    if fit:
        ax.annotate(
            f"pole sum c1+c2 = {fit['c1_plus_c2']:.2e}\n"
            f"c1 vs analytic: {fit['c1_vs_analytic']:.2e}",
            xy=(0.05, 0.82), xycoords="axes fraction", fontsize=8)
        consumed.append(("fit", (float(fit["c1_plus_c2"]),
                                 float(fit["c1_vs_analytic"]))))
    ax.set_xlabel(job.xlabel or "1 / a")
    ax.set_ylabel(job.ylabel or "energy density piece")
    ax.set_title(job.title or "opposing poles")
    ax.legend(fontsize=8)
    return fig, consumed


def _render_bethe(job: PlotJob, tables: list[tuple[str, list[dict]]]):
    path, rows = tables[0]
    c = [float(r["c"]) for r in rows]
    e = [float(r["E_over_L"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.semilogx(c, e, "o", label="rapidity solver")
    consumed = [("E_over_L", tuple(c) + tuple(e))]
    fit = _sidecar_fit(path)
    if fit:
        e0, p, q = fit["e0"], fit["p"], fit["q"]
        ax.semilogx(c, [e0 * (1 + p / x + q / x**2) for x in c], "--",
                    label=f"e0(1 + p/c + q/c²), p={p:.3f}, q={q:.2f}")
        consumed.append(("fit", (float(e0), float(p), float(q))))
    ax.set_xlabel(job.xlabel or "coupling c")
    ax.set_ylabel(job.ylabel or "E / L")
    ax.set_title(job.title or "strong-coupling energy")
    ax.legend(fontsize=8)
    return fig, consumed


_RENDERERS = {
    "conjecture": _render_conjecture,
    "sweep": _render_sweep,
    "divergence": _render_divergence,
    "bethe": _render_bethe,
}


def build_figure(job: PlotJob):
    """Figure plus the digest of every value it consumed."""
    tables = []
    kinds = set()
    for path in job.inputs + job.overlays:
        kind, rows = _read_table(path)
        kinds.add(kind)
        tables.append((path, rows))
    if len(kinds) != 1:
        raise SchemaMismatch(f"inputs mix table kinds: {sorted(kinds)}")
    kind = kinds.pop()
    fig, consumed = _RENDERERS[kind](job, tables)
    if job.xlabel and kind == "conjecture":
        for ax in fig.axes:
            ax.set_xlabel(job.xlabel)
    return fig, kind, payload_digest(consumed)


def render(job: PlotJob) -> str:
    """Draw the job and write the PNG; returns the output path."""
    fig, kind, digest = build_figure(job)
    try:
        fig.savefig(job.out_path, dpi=150,
                    metadata={"pointfig-schema": kind,
                              "pointfig-payload-sha256": digest})
    finally:
        plt.close(fig)
    return job.out_path


def png_text_chunks(path: str) -> dict[str, str]:
    """tEXt/iTXt entries of a PNG — enough to audit the embedded digest."""
    out: dict[str, str] = {}
    with open(path, "rb") as fh:
        if fh.read(8) != b"\x89PNG\r\n\x1a\n":
            raise SchemaMismatch(f"{path} is not a PNG")
        while True:
            head = fh.read(8)
            if len(head) < 8:
                break
            length, ctype = struct.unpack(">I4s", head)
            body = fh.read(length)
            fh.read(4)  # CRC
            if ctype == b"tEXt":
                key, _, val = body.partition(b"\x00")
                out[key.decode("latin-1")] = val.decode("latin-1")
            elif ctype == b"iTXt":
                key, _, rest = body.partition(b"\x00")
                flag = rest[:1]
                text = rest[2:].split(b"\x00", 2)[-1]
                if flag == b"\x01":
                    text = zlib.decompress(text)
                out[key.decode("latin-1")] = text.decode("utf-8")
            elif ctype == b"IEND":
                break
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="pointfig",
        description="Render pointjump CSV artifacts (recognized by header) "
                    "into a PNG carrying a checksum of the plotted values.")
    ap.add_argument("inputs", nargs="+", help="CSV tables to draw")
    ap.add_argument("-o", "--output", required=True, help="PNG path")
    ap.add_argument("--overlay", action="append", default=[],
                    help="extra CSV of the same kind drawn on top")
    ap.add_argument("--title")
    ap.add_argument("--xlabel")
    ap.add_argument("--ylabel")
    args = ap.parse_args(argv)
    try:
        job = PlotJob(inputs=tuple(args.inputs), out_path=args.output,
                      overlays=tuple(args.overlay), title=args.title,
                      xlabel=args.xlabel, ylabel=args.ylabel)
        out = render(job)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
