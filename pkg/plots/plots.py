#!/usr/bin/env python3
"""Render figures from fermiphase benchmark reports.

Reads only the documented file formats (report.csv / kparticle.csv /
summary.json and the float64 grid dumps with JSON sidecars); no in-process
coupling to the solver package. Output images are byte-stable across reruns:
fixed figure geometry, Agg backend, no timestamps.

Usage:
    plots.py --report DIR --kind convergence  --out fig.png
    plots.py --report DIR --kind heatmap      --out fig.png [--field wigner_N64]
    plots.py --report DIR --kind density_overlay --out fig.png [--field rho_N64]
    plots.py --report DIR --kind kparticle_gap --out fig.png
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.4, 4.2)
DPI = 130

KINDS = ("convergence", "density_overlay", "heatmap", "kparticle_gap")


@dataclass(frozen=True)
class FigureSpec:
    report_dir: Path
    kind: str
    out_path: Path
    field: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [dict(r) for r in reader]
        return list(reader.fieldnames or []), rows


def read_dump(report_dir: Path, field: str):
    with open(report_dir / f"{field}.json") as fh:
        meta = json.load(fh)
    raw = np.fromfile(report_dir / f"{field}.bin", dtype="<f8")
    if meta["kind"] == "phase":
        shape = (meta["n_x"], meta["n_p"])
    else:
        shape = (meta["n_x"],)
    size = int(np.prod(shape))
    vals = raw[:size].reshape(shape)
    return meta, vals


def _column(rows, name):
    vals = []
    for r in rows:
        cell = r.get(name, "")
        vals.append(float(cell) if cell not in ("", None) else np.nan)
    return np.asarray(vals)


def render_convergence(spec: FigureSpec) -> None:
    header, rows = read_csv(spec.report_dir / "report.csv")
    wanted = [c for c in header if c.endswith("_m_dist") or c.endswith("_f_dist")]
    if not wanted:
        raise ValueError("report.csv has no norm-distance columns")
    hbar = _column(rows, "hbar")
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for col in wanted:
        ax.loglog(hbar, _column(rows, col), marker="o", label=col)
    d = 1
    summary_path = spec.report_dir / "summary.json"
    if summary_path.exists():
        d = json.loads(summary_path.read_text())["config"].get("d", 1)
    ax.axhline((2 * np.pi) ** (d / 1.0), color="0.5", lw=0.8, ls="--",
               label="(2pi)^{d/p}, p=1")
    ax.set_xlabel("hbar")
    ax.set_ylabel("norm distance to the classical state")
    ax.legend(fontsize=7)
    ax.set_title("convergence across the particle-number sweep")
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)


def render_density_overlay(spec: FigureSpec) -> None:
    field = spec.field or "tf_rho"
    meta, rho = read_dump(spec.report_dir, field)
    L, n = meta["L_x"], meta["n_x"]
    x = (np.arange(n) - n // 2) * (2 * L / n)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.plot(x, rho, label=meta["field_name"])
    closed = np.sqrt(np.clip(2 - x ** 2, 0, None)) / np.pi
    ax.plot(x, closed, "--", label="sqrt(2 - x^2)_+ / pi")
    ax.set_xlim(-3, 3)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)


def render_heatmap(spec: FigureSpec) -> None:
    field = spec.field
    if field is None:
        candidates = sorted(spec.report_dir.glob("wigner_N*.json"))
        if not candidates:
            raise ValueError("no wigner dumps in the report directory")
        field = candidates[-1].stem
    meta, vals = read_dump(spec.report_dir, field)
    if meta["kind"] != "phase":
        raise ValueError(f"{field} is not a phase-space dump")
    Lx, Lp = meta["L_x"], meta["L_p"]
    fig, ax = plt.subplots(figsize=(5.4, 4.6), dpi=DPI)
    im = ax.imshow(vals.T, origin="lower", extent=(-Lx, Lx, -Lp, Lp),
                   cmap="RdBu_r", vmin=-np.abs(vals).max(), vmax=np.abs(vals).max())
    theta = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.sqrt(2) * np.cos(theta), np.sqrt(2) * np.sin(theta),
            color="k", lw=0.7, ls=":")
    ax.set_xlim(-3, 3)
    ax.set_ylim(-3, 3)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title(field)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)


def render_kparticle_gap(spec: FigureSpec) -> None:
    header, rows = read_csv(spec.report_dir / "kparticle.csv")
    for col in ("N", "gap", "gap_limit"):
        if col not in header:
            raise ValueError(f"kparticle.csv lacks column {col!r}")
    rows = [r for r in rows if r.get("gap")]
    N = _column(rows, "N")
    gap = _column(rows, "gap")
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.semilogx(N, gap, marker="s", label="norm gap")
    ax.axhline(float(rows[0]["gap_limit"]), color="0.4", ls="--",
               label="2pi (sqrt(2) - 1)")
    ax.set_xlabel("N")
    ax.set_ylabel("order-2 L2 norm gap")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)


RENDERERS = {
    "convergence": render_convergence,
    "density_overlay": render_density_overlay,
    "heatmap": render_heatmap,
    "kparticle_gap": render_kparticle_gap,
}


def render(spec: FigureSpec) -> Path:
    if not spec.report_dir.is_dir():
        raise FileNotFoundError(f"report directory not found: {spec.report_dir}")
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    RENDERERS[spec.kind](spec)
    return spec.out_path


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--report", required=True, help="report directory")
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--field", default=None, help="dump field name for heatmaps/overlays")
    args = ap.parse_args(argv)
    try:
        out = render(FigureSpec(Path(args.report), args.kind, Path(args.out), args.field))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
