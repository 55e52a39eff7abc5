"""Command-line interface.

    coldist dist 1e90ff 0000ff --synthetic-table
    coldist strip 0000ff palette.csv --table names.csv --out strip.png
    coldist learn-d --table names.csv --t 0.7 --out ground.csv
    coldist edge photo.png --metric coldist --table names.csv --out edges.png

Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .colorspace import RgbColor
from .compass import DEFAULT_ORIENTATIONS, DEFAULT_QUANT_STEP, DEFAULT_RADIUS, detect_edges, thin
from .imageio import ImageDecodeError, read_image, read_palette, write_png
from .metric import METRICS, MetricParams, make_metric, represent
from .naming import (GroundMatrixError, NamingTableError, TABLE_ENV, default_table_path, fallback_table,
                     learn_ground_distance, load_ground_matrix, load_naming_table, save_ground_matrix)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

SWATCH_W = 24
SWATCH_H = 64
GAP = 8

TABLE_HINT = (f"no naming table: pass --table <csv>, set {TABLE_ENV}, or use --synthetic-table "
              "(see README, 'Naming table' for converting the published table to CSV)")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    metric: str = "coldist"
    params: MetricParams = field(default_factory=MetricParams)
    table: Path | None = None
    synthetic_table: bool = False
    ground: Path | None = None
    radius: float = DEFAULT_RADIUS
    orientations: int = DEFAULT_ORIENTATIONS
    quant_step: float = DEFAULT_QUANT_STEP
    out: Path | None = None

    @classmethod
    def from_args(cls, ns):
        if ns.metric not in METRICS:
            raise UsageError(f"unknown metric {ns.metric!r}")
        try:
            params = MetricParams().with_overrides(T=ns.T, alpha=ns.alpha, Z=ns.Z, gamma=ns.gamma, t=ns.t)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if ns.radius < 2:
            raise UsageError("--radius must be at least 2")
        if ns.orientations < 2:
            raise UsageError("--orientations must be at least 2")
        if not ns.quant_step > 0:
            raise UsageError("--quant-step must be positive")
        return cls(ns.metric, params, ns.table or default_table_path(), ns.synthetic_table, ns.ground,
                   ns.radius, ns.orientations, ns.quant_step, ns.out)

    def naming_table(self):
        if self.synthetic_table:
            return fallback_table()
        if self.table is None:
            raise UsageError(TABLE_HINT)
        try:
            return load_naming_table(self.table)
        except OSError as exc:
            raise DataError(f"cannot read naming table {self.table}: {exc.strerror}") from None
        except NamingTableError as exc:
            raise DataError(f"{self.table}: {exc}") from None

    def ground_matrix(self, table):
        if self.ground is None:
            try:
                return learn_ground_distance(table, self.params.t)
            except NamingTableError as exc:
                raise DataError(str(exc)) from None
        try:
            D = load_ground_matrix(self.ground)
        except OSError as exc:
            raise DataError(f"cannot read ground matrix {self.ground}: {exc.strerror}") from None
        except GroundMatrixError as exc:
            raise DataError(f"{self.ground}: {exc}") from None
        if D.term_names != table.term_names:
            raise DataError(f"{self.ground}: terms {D.term_names} do not match the naming table")
        return D

    def metric_for(self, name, table):
        D = self.ground_matrix(table) if name == "coldist" else None
        return make_metric(name, self.params, D)


def _fmt(x):
    return format(float(x), ".12g")


def _hex(text):
    try:
        return RgbColor.from_hex(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_dist(cfg: RunConfig, a_hex, b_hex, out=None):
    out = out or sys.stdout
    a, b = _hex(a_hex), _hex(b_hex)
    table = cfg.naming_table()
    va, vb = represent(a, table), represent(b, table)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["a", "b", *METRICS])
    w.writerow([a.to_hex(), b.to_hex(), *(_fmt(cfg.metric_for(m, table)(va, vb)) for m in METRICS)])
    return EXIT_OK


def rank_palette(cfg: RunConfig, reference, palette, table):
    """Palette entries with their distances to ``reference``, ascending, stable."""
    dist = cfg.metric_for(cfg.metric, table)
    vref = represent(reference, table)
    scored = [(c, dist(vref, represent(c, table))) for c in palette]
    return sorted(scored, key=lambda item: item[1])


def render_strip(reference, ordered):
    n = len(ordered)
    img = np.full((SWATCH_H, SWATCH_W * (n + 1) + GAP, 3), 255, dtype=np.uint8)
    img[:, :SWATCH_W] = reference
    for k, c in enumerate(ordered):
        x0 = SWATCH_W + GAP + k * SWATCH_W
        img[:, x0:x0 + SWATCH_W] = c
    return img


def cmd_strip(cfg: RunConfig, ref_hex, palette_path, out=None):
    out = out or sys.stdout
    reference = _hex(ref_hex)
    try:
        palette = read_palette(palette_path)
    except OSError as exc:
        raise DataError(f"cannot read palette {palette_path}: {exc.strerror}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if len(palette) < 2:
        raise DataError(f"{palette_path}: palette needs at least 2 colors, found {len(palette)}")
    table = cfg.naming_table()
    ranked = rank_palette(cfg, reference, palette, table)
    png = cfg.out or Path("strip.png")
    csv_path = png.with_suffix(".csv")
    write_png(png, render_strip(reference, [c for c, _ in ranked]))
    rows = [["rank", "hex", cfg.metric]] + [[k, c.to_hex(), _fmt(d)] for k, (c, d) in enumerate(ranked)]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    csv.writer(out, lineterminator="\n").writerows(rows)
    return EXIT_OK


def read_ordering(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return [(int(r[0]), RgbColor.from_hex(r[1]), float(r[2])) for r in rows[1:]]


def cmd_learn_d(cfg: RunConfig, out=None):
    out = out or sys.stdout
    table = cfg.naming_table()
    try:
        D = learn_ground_distance(table, cfg.params.t)
    except NamingTableError as exc:
        raise DataError(str(exc)) from None
    dest = cfg.out or Path("ground.csv")
    save_ground_matrix(D, dest)
    off = D.off_diagonal()
    print(f"wrote {len(D.term_names)}x{len(D.term_names)} ground matrix to {dest}", file=out)
    print(f"off-diagonal min={_fmt(off.min())} median={_fmt(np.median(off))} max={_fmt(off.max())}", file=out)
    return EXIT_OK


def cmd_edge(cfg: RunConfig, image_path, thinning=False, out=None):
    out = out or sys.stdout
    try:
        image = read_image(image_path)
    except ImageDecodeError as exc:
        raise DataError(str(exc)) from None
    if min(image.shape[:2]) <= 2 * cfg.radius:
        raise DataError(f"image {image.shape[1]}x{image.shape[0]} is too small for radius {cfg.radius}")
    table = cfg.naming_table()
    dist = cfg.metric_for(cfg.metric, table)
    edges = detect_edges(image, dist, table, cfg.radius, cfg.orientations, cfg.quant_step)
    if thinning:
        edges = thin(edges)
    dest = cfg.out or Path("edges.png")
    write_png(dest, edges.to_gray8())
    print(f"metric={cfg.metric} max_strength={_fmt(edges.strength.max())} wrote {dest}", file=out)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", default="coldist", choices=METRICS)
    common.add_argument("--table", type=Path, help=f"naming-table CSV (default: ${TABLE_ENV})")
    common.add_argument("--synthetic-table", action="store_true",
                        help="use the built-in 11-prototype table instead of a CSV")
    common.add_argument("--ground", type=Path, help="ground-matrix CSV (default: learned from the table)")
    common.add_argument("--T", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--Z", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--t", type=float)
    common.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    common.add_argument("--orientations", type=int, default=DEFAULT_ORIENTATIONS)
    common.add_argument("--quant-step", type=float, default=DEFAULT_QUANT_STEP)
    common.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(prog="coldist", description="COL_DIST color difference tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="all four distances between two colors")
    p.add_argument("a")
    p.add_argument("b")
    p = sub.add_parser("strip", parents=[common], help="palette sorted by distance to a reference")
    p.add_argument("reference")
    p.add_argument("palette", type=Path)
    sub.add_parser("learn-d", parents=[common], help="learn the term ground-distance matrix")
    p = sub.add_parser("edge", parents=[common], help="compass edge detection")
    p.add_argument("image", type=Path)
    p.add_argument("--thin", action="store_true", help="non-maximum suppression")
    return parser


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        if ns.command == "dist":
            return cmd_dist(cfg, ns.a, ns.b)
        if ns.command == "strip":
            return cmd_strip(cfg, ns.reference, ns.palette)
        if ns.command == "learn-d":
            return cmd_learn_d(cfg)
        return cmd_edge(cfg, ns.image, ns.thin)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"coldist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"coldist: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
