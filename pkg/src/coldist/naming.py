"""Basic color term probabilities and the learned term-to-term ground distance.

A :class:`NamingTable` maps each 8x8x8 cell of the RGB cube to a probability
vector over color terms. :func:`learn_ground_distance` turns the table's
columns into a symmetric distance between terms: terms that share probability
mass over many cells are close.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .colorspace import ciede2000, rgb_to_lab

TERMS = ("black", "blue", "brown", "grey", "green", "orange",
         "pink", "purple", "red", "white", "yellow")

CELL = 8
CELLS_PER_AXIS = 256 // CELL
N_CELLS = CELLS_PER_AXIS ** 3
SUM_TOL = 1e-3
SYMMETRY_TOL = 1e-9

TABLE_ENV = "COLDIST_NAMING_TABLE"

# Representative sRGB prototypes for the synthetic table.
PROTOTYPES = {
    "black": (0, 0, 0),
    "blue": (0, 0, 255),
    "brown": (139, 69, 19),
    "grey": (128, 128, 128),
    "green": (0, 128, 0),
    "orange": (255, 165, 0),
    "pink": (255, 192, 203),
    "purple": (128, 0, 128),
    "red": (255, 0, 0),
    "white": (255, 255, 255),
    "yellow": (255, 255, 0),
}


class NamingTableError(ValueError):
    """Malformed naming-table input; ``row`` is the 1-based data row when known."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class GroundMatrixError(ValueError):
    pass


def cell_index(r, g, b):
    """Flat row index of the cell holding an RGB color (r varies slowest)."""
    return ((int(r) // CELL) * CELLS_PER_AXIS + int(g) // CELL) * CELLS_PER_AXIS + int(b) // CELL


@dataclass(frozen=True, eq=False)
class NamingTable:
    """Term probabilities per RGB cell.

    ``probs`` has shape ``(32768, K)``; row ``cell_index(r, g, b)`` holds the
    distribution for every color in that cell.
    """

    probs: np.ndarray
    term_names: tuple = TERMS

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        names = tuple(self.term_names)
        if probs.ndim != 2 or probs.shape[0] != N_CELLS:
            raise NamingTableError(f"expected {N_CELLS} rows, got shape {probs.shape}")
        if probs.shape[1] != len(names):
            raise NamingTableError(f"{probs.shape[1]} columns for {len(names)} term names")
        if np.any(probs < 0):
            raise NamingTableError("negative probability", int(np.argwhere(probs < 0)[0, 0]) + 1)
        bad = np.abs(probs.sum(axis=1) - 1.0) > 1e-6
        if np.any(bad):
            raise NamingTableError("probabilities do not sum to 1", int(np.argmax(bad)) + 1)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "term_names", names)

    @property
    def n_terms(self):
        return self.probs.shape[1]

    def lookup(self, r, g, b):
        return self.probs[cell_index(r, g, b)]


def term_probabilities(table: NamingTable, c) -> np.ndarray:
    """Term probability vector of an RGB color: pure cell lookup, no interpolation."""
    r, g, b = c
    for v in (r, g, b):
        if not 0 <= v <= 255:
            raise ValueError(f"RGB channel out of range: {c!r}")
    return table.lookup(r, g, b)


def _renormalize(probs, first_row=1):
    sums = probs.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
    if bad.size:
        i = int(bad[0])
        raise NamingTableError(f"probabilities sum to {sums[i]:.6g}", first_row + i)
    return probs / sums[:, None]


def load_naming_table(source) -> NamingTable:
    """Read a naming table from CSV (path or text stream).

    Expected header: ``r,g,b,<term>,...``; one row per cell, ``r,g,b`` being
    the cell's lowest channel values. Rows may come in any order but every
    cell must appear exactly once. Rows summing to within 1e-3 of 1 are
    renormalized.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_naming_table(fh)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise NamingTableError("empty input") from None
    if header[:3] != ["r", "g", "b"] or len(header) < 4:
        raise NamingTableError(f"header must start with r,g,b followed by term names, got {header}")
    terms = tuple(header[3:])
    width = len(header)
    probs = np.full((N_CELLS, len(terms)), np.nan)
    seen = np.zeros(N_CELLS, dtype=bool)
    count = 0
    for lineno, row in enumerate(reader, start=1):
        if not row:
            continue
        count += 1
        if len(row) != width:
            raise NamingTableError(f"expected {width} columns, got {len(row)}", lineno)
        try:
            r, g, b = (int(v) for v in row[:3])
            vals = [float(v) for v in row[3:]]
        except ValueError as exc:
            raise NamingTableError(f"unparsable value ({exc})", lineno) from None
        if any(not 0 <= v <= 255 or v % CELL for v in (r, g, b)):
            raise NamingTableError(f"cell corner ({r},{g},{b}) is not a multiple of {CELL} in [0,255]", lineno)
        if any(v < 0 for v in vals):
            raise NamingTableError("negative probability", lineno)
        s = sum(vals)
        if abs(s - 1.0) > SUM_TOL:
            raise NamingTableError(f"probabilities sum to {s:.6g}", lineno)
        k = cell_index(r, g, b)
        if seen[k]:
            raise NamingTableError(f"duplicate cell ({r},{g},{b})", lineno)
        seen[k] = True
        probs[k] = vals
    if count != N_CELLS:
        raise NamingTableError(f"expected {N_CELLS} data rows, got {count}")
    return NamingTable(_renormalize(probs), terms)


def save_naming_table(table: NamingTable, sink):
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            return save_naming_table(table, fh)
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["r", "g", "b", *table.term_names])
    steps = range(0, 256, CELL)
    for r in steps:
        for g in steps:
            for b in steps:
                w.writerow([r, g, b, *(repr(float(v)) for v in table.lookup(r, g, b))])


def load_w2c_text(path) -> NamingTable:
    """Convert the whitespace-separated ``w2c.txt`` of the van de Weijer et al.
    color-naming model.

    Each of its 32768 lines holds three cell coordinates followed by the 11
    term probabilities (black ... yellow). Cells are placed by their
    coordinates when those form a permutation of the cube; otherwise the
    original MATLAB enumeration (red index fastest) is assumed.
    """
    raw = np.loadtxt(path)
    if raw.shape != (N_CELLS, 14):
        raise NamingTableError(f"expected {N_CELLS}x14 values, got {raw.shape}")
    probs = raw[:, 3:]
    if np.any(probs < 0):
        raise NamingTableError("negative probability", int(np.argwhere(probs < 0)[0, 0]) + 1)
    probs = _renormalize(probs)
    coords = np.floor(raw[:, :3] / CELL).astype(np.int64)
    idx = (coords[:, 0] * CELLS_PER_AXIS + coords[:, 1]) * CELLS_PER_AXIS + coords[:, 2]
    if coords.min() < 0 or coords.max() >= CELLS_PER_AXIS or np.unique(idx).size != N_CELLS:
        k = np.arange(N_CELLS)
        idx = ((k % 32) * CELLS_PER_AXIS + (k // 32) % 32) * CELLS_PER_AXIS + k // 1024
    out = np.empty_like(probs)
    out[idx] = probs
    return NamingTable(out, TERMS)


def default_table_path():
    p = os.environ.get(TABLE_ENV)
    return Path(p) if p else None


def fallback_table() -> NamingTable:
    """Synthetic 11-term table with no external data.

    Every cell carries the delta distribution of the prototype color (see
    :data:`PROTOTYPES`) closest to the cell center under CIEDE2000; each
    prototype's own cell is pinned to its own term.
    """
    return _fallback_cached()


def _build_fallback():
    centers = np.arange(CELL // 2, 256, CELL, dtype=np.float64)
    rr, gg, bb = np.meshgrid(centers, centers, centers, indexing="ij")
    rgb = np.stack([rr.ravel(), gg.ravel(), bb.ravel()], axis=1)
    lab = rgb_to_lab(rgb)
    protos = np.array([PROTOTYPES[t] for t in TERMS], dtype=np.float64)
    plab = rgb_to_lab(protos)
    dist = ciede2000(lab[:, None, :], plab[None, :, :])
    nearest = np.argmin(dist, axis=1)
    for k, (r, g, b) in enumerate(protos.astype(int)):
        nearest[cell_index(r, g, b)] = k
    probs = np.zeros((N_CELLS, len(TERMS)))
    probs[np.arange(N_CELLS), nearest] = 1.0
    return NamingTable(probs, TERMS)


_FALLBACK = None


def _fallback_cached():
    global _FALLBACK
    if _FALLBACK is None:
        _FALLBACK = _build_fallback()
    return _FALLBACK


# ---------------------------------------------------------------------------
# ground distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroundMatrix:
    """Symmetric, zero-diagonal term distances in [0, 1]."""

    d: np.ndarray
    term_names: tuple = TERMS

    def __post_init__(self):
        d = np.array(self.d, dtype=np.float64)
        names = tuple(self.term_names)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise GroundMatrixError(f"ground matrix must be square, got shape {d.shape}")
        if d.shape[0] != len(names):
            raise GroundMatrixError(f"{d.shape[0]} rows for {len(names)} term names")
        if not np.all(np.isfinite(d)):
            raise GroundMatrixError("non-finite entries")
        if np.any(d < 0) or np.any(d > 1):
            i, j = np.argwhere((d < 0) | (d > 1))[0]
            raise GroundMatrixError(f"entry [{i}][{j}] = {d[i, j]!r} outside [0, 1]")
        asym = np.abs(d - d.T)
        if np.any(asym > SYMMETRY_TOL):
            i, j = np.unravel_index(np.argmax(asym), d.shape)
            raise GroundMatrixError(f"asymmetric: d[{i}][{j}] = {d[i, j]!r} but d[{j}][{i}] = {d[j, i]!r}")
        if np.any(np.diag(d) != 0):
            raise GroundMatrixError("diagonal must be zero")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "term_names", names)

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, str):
            i = self.term_names.index(i)
        if isinstance(j, str):
            j = self.term_names.index(j)
        return float(self.d[i, j])

    def off_diagonal(self):
        k = self.d.shape[0]
        return self.d[~np.eye(k, dtype=bool)]


def overlap_distance(probs):
    """Unthresholded term distance: one minus twice the shared mass fraction."""
    m = np.asarray(probs, dtype=np.float64)
    colsum = m.sum(axis=0)
    k = m.shape[1]
    shared = np.empty((k, k))
    for i in range(k):
        shared[i] = np.minimum(m[:, i:i + 1], m).sum(axis=0)
    return 1.0 - 2.0 * shared / (colsum[:, None] + colsum[None, :])


def learn_ground_distance(table, t=0.7) -> GroundMatrix:
    """Ground distance between terms from their co-occurrence over the RGB cube.

    ``D[i, j] = min(Dhat[i, j], t) / t`` where ``Dhat`` is
    :func:`overlap_distance` of the table's columns. Accepts a
    :class:`NamingTable` or a bare ``(cells, K)`` array.
    """
    if not 0 < t <= 1:
        raise ValueError(f"threshold t must lie in (0, 1], got {t}")
    probs = np.asarray(getattr(table, "probs", table), dtype=np.float64)
    names = getattr(table, "term_names", None) or tuple(f"term{i}" for i in range(probs.shape[1]))
    empty = np.flatnonzero(probs.sum(axis=0) <= 0)
    if empty.size:
        raise NamingTableError(f"term {names[int(empty[0])]!r} has no probability mass")
    d = np.minimum(overlap_distance(probs), t) / t
    np.fill_diagonal(d, 0.0)
    return GroundMatrix(np.clip(d, 0.0, 1.0), names)


def save_ground_matrix(D: GroundMatrix, sink):
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            return save_ground_matrix(D, fh)
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(D.term_names)
    for row in D.d:
        w.writerow([repr(float(v)) for v in row])


def load_ground_matrix(source) -> GroundMatrix:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_ground_matrix(fh)
    rows = [r for r in csv.reader(source) if r]
    if not rows:
        raise GroundMatrixError("empty input")
    names = tuple(h.strip() for h in rows[0])
    try:
        d = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise GroundMatrixError(f"unparsable value ({exc})") from None
    if d.shape != (len(names), len(names)):
        raise GroundMatrixError(f"expected {len(names)}x{len(names)} values, got {d.shape}")
    return GroundMatrix(d, names)


def ground_matrix_to_string(D: GroundMatrix) -> str:
    buf = io.StringIO()
    save_ground_matrix(D, buf)
    return buf.getvalue()
