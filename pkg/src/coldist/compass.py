"""Generalized compass edge detector with a pluggable color difference.

For every pixel a disc of the given radius is split by a diameter at each of
``orientations`` angles spread uniformly over [0, pi). Each half is summarized
as a signature: its pixels are bucketed on a uniform Lab grid and every
non-empty bucket contributes one cluster (mean sRGB color, pixel fraction).
The response at an orientation is the EMD between the two half signatures,
using the chosen color difference, minus its self-distance, as ground
distance. The pixel keeps the strongest orientation.

Orientations are angles of the dividing line measured counter-clockwise from
the +x (column) axis with y pointing up, so a vertical boundary answers at
pi/2. Pixels lying exactly on the line belong to neither half, which always
excludes the center pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .colorspace import rgb_to_lab, rgb_to_lab_scalar
from .emd import emd_kernel
from .metric import ColorDifference, ColorRepr, pair_distance, represent
from .naming import CELL, CELLS_PER_AXIS, N_CELLS, NamingTable

DEFAULT_RADIUS = 8
DEFAULT_ORIENTATIONS = 12
DEFAULT_QUANT_STEP = 10.0

_KEY_OFFSET = 512
_KEY_BASE = 1024


class EmptyHalfDisc(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Signature:
    """Clusters of a half disc: representatives and their mass fractions."""

    reps: list
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if len(self.reps) != w.size or w.size == 0:
            raise ValueError("a signature needs one weight per representative and at least one cluster")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
            raise ValueError("signature weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def clusters(self):
        return list(zip(self.reps, self.weights))

    def __len__(self):
        return len(self.reps)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    strength: np.ndarray
    orientation: np.ndarray

    @property
    def height(self):
        return self.strength.shape[0]

    @property
    def width(self):
        return self.strength.shape[1]

    def to_gray8(self) -> np.ndarray:
        """Strengths mapped linearly from [0, max] to 0..255."""
        top = float(self.strength.max()) if self.strength.size else 0.0
        if top <= 0:
            return np.zeros(self.strength.shape, dtype=np.uint8)
        return np.rint(np.clip(self.strength / top, 0.0, 1.0) * 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# geometry and preprocessing
# ---------------------------------------------------------------------------

def orientation_angles(n):
    return np.arange(n) * (math.pi / n)


def disc_layout(radius, orientations):
    """Disc offsets ``(dy, dx)`` and, per orientation, the side (+1/-1/0) of each."""
    if radius < 2:
        raise ValueError(f"radius must be at least 2, got {radius}")
    if orientations < 2:
        raise ValueError(f"need at least 2 orientations, got {orientations}")
    r = int(math.floor(radius))
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    inside = dy * dy + dx * dx <= radius * radius
    offsets = np.stack([dy[inside], dx[inside]], axis=1).astype(np.int64)
    theta = orientation_angles(orientations)[:, None]
    y_up = -offsets[:, 0][None, :].astype(np.float64)
    cross = np.cos(theta) * y_up - np.sin(theta) * offsets[:, 1][None, :]
    sides = np.where(np.abs(cross) < 1e-9, 0, np.sign(cross)).astype(np.int8)
    return offsets, sides


def _prepare(image, quant_step):
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if not quant_step > 0:
        raise ValueError(f"quantization step must be positive, got {quant_step}")
    rgb = np.ascontiguousarray(img, dtype=np.float64)
    lab = rgb_to_lab(rgb.reshape(-1, 3)).reshape(rgb.shape)
    q = np.floor(lab / quant_step).astype(np.int64) + _KEY_OFFSET
    keys = (q[..., 0] * _KEY_BASE + q[..., 1]) * _KEY_BASE + q[..., 2]
    return rgb, np.ascontiguousarray(keys)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@njit
def _half_clusters(rgb, keys, y, x, offsets, side_row, want, ckeys, csum, ccount):
    """Bucket one half disc; returns the number of clusters filled in."""
    h = rgb.shape[0]
    w = rgb.shape[1]
    nc = 0
    for k in range(offsets.shape[0]):
        if side_row[k] != want:
            continue
        yy = y + offsets[k, 0]
        xx = x + offsets[k, 1]
        if yy < 0 or yy >= h or xx < 0 or xx >= w:
            continue
        key = keys[yy, xx]
        c = -1
        for t in range(nc):
            if ckeys[t] == key:
                c = t
                break
        if c < 0:
            c = nc
            ckeys[c] = key
            csum[c, 0] = 0.0
            csum[c, 1] = 0.0
            csum[c, 2] = 0.0
            ccount[c] = 0
            nc += 1
        csum[c, 0] += rgb[yy, xx, 0]
        csum[c, 1] += rgb[yy, xx, 1]
        csum[c, 2] += rgb[yy, xx, 2]
        ccount[c] += 1
    return nc


@njit
def _cluster_reps(nc, csum, ccount, probs, lab_out, cell_out, w_out):
    total = 0
    for c in range(nc):
        total += ccount[c]
    for c in range(nc):
        r = csum[c, 0] / ccount[c]
        g = csum[c, 1] / ccount[c]
        b = csum[c, 2] / ccount[c]
        l, a, bb = rgb_to_lab_scalar(r, g, b)
        lab_out[c, 0] = l
        lab_out[c, 1] = a
        lab_out[c, 2] = bb
        cell_out[c] = ((int(r) // CELL) * CELLS_PER_AXIS + int(g) // CELL) * CELLS_PER_AXIS + int(b) // CELL
        w_out[c] = ccount[c] / total


@njit
def _ground_cost(n1, lab1, cell1, n2, lab2, cell2, probs, code, T, alpha, Z, gamma, D, floor, cache):
    cost = np.empty((n1, n2))
    for i in range(n1):
        for j in range(n2):
            if code == 0 and alpha < 1.0:
                # d2 depends only on the two naming cells; memoize it.
                a = cell1[i]
                b = cell2[j]
                if a > b:
                    a, b = b, a
                key = a * N_CELLS + b
                if key in cache:
                    dist2 = cache[key]
                else:
                    dist2 = 0.0
                    if a != b:
                        dist2 = emd_kernel(probs[a], probs[b], D)
                    cache[key] = dist2
                de = pair_distance(3, lab1[i], probs[cell1[i]], lab2[j], probs[cell2[j]],
                                   T, alpha, Z, gamma, D)
                d1 = min(de, T) / T
                d3 = alpha * d1 + (1.0 - alpha) * dist2
                val = 1.0 / (1.0 + math.exp(-(Z * d3 - Z / 2.0)))
            else:
                val = pair_distance(code, lab1[i], probs[cell1[i]], lab2[j], probs[cell2[j]],
                                    T, alpha, Z, gamma, D)
            val -= floor
            cost[i, j] = val if val > 0.0 else 0.0
    return cost


@njit
def _compass_kernel(rgb, keys, ys, xs, offsets, sides, probs, code, T, alpha, Z, gamma, D, floor):
    npix = ys.shape[0]
    n_orient = sides.shape[0]
    n_off = offsets.shape[0]
    strength = np.zeros(npix)
    best_o = np.zeros(npix, dtype=np.int64)

    ckeys1 = np.empty(n_off, dtype=np.int64)
    csum1 = np.empty((n_off, 3))
    ccount1 = np.empty(n_off, dtype=np.int64)
    ckeys2 = np.empty(n_off, dtype=np.int64)
    csum2 = np.empty((n_off, 3))
    ccount2 = np.empty(n_off, dtype=np.int64)
    lab1 = np.empty((n_off, 3))
    lab2 = np.empty((n_off, 3))
    cell1 = np.empty(n_off, dtype=np.int64)
    cell2 = np.empty(n_off, dtype=np.int64)
    w1 = np.empty(n_off)
    w2 = np.empty(n_off)
    cache = {0: 0.0}

    for n in range(npix):
        y = ys[n]
        x = xs[n]
        best = 0.0
        arg = 0
        for o in range(n_orient):
            n1 = _half_clusters(rgb, keys, y, x, offsets, sides[o], 1, ckeys1, csum1, ccount1)
            n2 = _half_clusters(rgb, keys, y, x, offsets, sides[o], -1, ckeys2, csum2, ccount2)
            if n1 == 0 or n2 == 0:
                continue
            _cluster_reps(n1, csum1, ccount1, probs, lab1, cell1, w1)
            _cluster_reps(n2, csum2, ccount2, probs, lab2, cell2, w2)
            cost = _ground_cost(n1, lab1, cell1, n2, lab2, cell2, probs, code,
                                T, alpha, Z, gamma, D, floor, cache)
            val = emd_kernel(w1[:n1].copy(), w2[:n2].copy(), cost)
            if val > best:
                best = val
                arg = o
        strength[n] = best
        best_o[n] = arg
    return strength, best_o


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def _kernel_args(dist: ColorDifference, table: NamingTable):
    T, alpha, Z, gamma, D = dist.kernel_args()
    return (table.probs, dist.code, T, alpha, Z, gamma, D, dist.floor)


def build_signature(image, center, radius, side, orientation_index=0, orientations=DEFAULT_ORIENTATIONS,
                    table: NamingTable | None = None, quant_step=DEFAULT_QUANT_STEP) -> Signature:
    """Signature of one half disc.

    ``side`` is +1 or -1 for the two halves cut by the diameter at
    ``orientation_index`` (of ``orientations``). Raises :class:`EmptyHalfDisc`
    when no pixel of the half lies inside the image.
    """
    if table is None:
        raise ValueError("a naming table is required")
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    rgb, keys = _prepare(image, quant_step)
    offsets, sides = disc_layout(radius, orientations)
    y, x = center
    n_off = offsets.shape[0]
    ckeys = np.empty(n_off, dtype=np.int64)
    csum = np.empty((n_off, 3))
    ccount = np.empty(n_off, dtype=np.int64)
    nc = _half_clusters(rgb, keys, int(y), int(x), offsets, sides[orientation_index], side, ckeys, csum, ccount)
    if nc == 0:
        raise EmptyHalfDisc(f"half disc at {center} is empty")
    means = csum[:nc] / ccount[:nc, None]
    weights = ccount[:nc] / ccount[:nc].sum()
    return Signature([represent(m, table) for m in means], weights)


def signature_distance(sig1: Signature, sig2: Signature, dist: ColorDifference) -> float:
    """EMD between two signatures with ``dist - dist.floor`` as ground distance."""
    cost = np.array([[max(dist(a, b) - dist.floor, 0.0) for b in sig2.reps] for a in sig1.reps])
    return float(emd_kernel(sig1.weights / sig1.weights.sum(), sig2.weights / sig2.weights.sum(), cost))


def compass_response(image, center, dist: ColorDifference, table: NamingTable, radius=DEFAULT_RADIUS,
                     orientations=DEFAULT_ORIENTATIONS, quant_step=DEFAULT_QUANT_STEP):
    """``(strength, orientation)`` of the compass operator at one pixel."""
    rgb, keys = _prepare(image, quant_step)
    offsets, sides = disc_layout(radius, orientations)
    y, x = center
    if not (0 <= y < rgb.shape[0] and 0 <= x < rgb.shape[1]):
        raise ValueError(f"center {center} outside the image")
    s, o = _compass_kernel(rgb, keys, np.array([y], dtype=np.int64), np.array([x], dtype=np.int64),
                           offsets, sides, *_kernel_args(dist, table))
    return float(s[0]), float(orientation_angles(orientations)[o[0]])


def detect_edges(image, dist: ColorDifference, table: NamingTable, radius=DEFAULT_RADIUS,
                 orientations=DEFAULT_ORIENTATIONS, quant_step=DEFAULT_QUANT_STEP) -> EdgeMap:
    """Compass response at every pixel; discs are clipped at the image border."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[0] <= 2 * radius or img.shape[1] <= 2 * radius:
        raise ValueError(f"image of shape {img.shape} is too small for radius {radius}")
    rgb, keys = _prepare(img, quant_step)
    offsets, sides = disc_layout(radius, orientations)
    h, w = keys.shape
    ys, xs = np.divmod(np.arange(h * w, dtype=np.int64), w)
    s, o = _compass_kernel(rgb, keys, ys, xs, offsets, sides, *_kernel_args(dist, table))
    angles = orientation_angles(orientations)
    return EdgeMap(s.reshape(h, w), angles[o].reshape(h, w))


def thin(edges: EdgeMap) -> EdgeMap:
    """Non-maximum suppression across the winning orientation.

    A pixel survives if its strength is at least that of both neighbors along
    the normal to its dividing line (rounded to the 8-neighborhood).
    """
    s = edges.strength
    h, w = s.shape
    normal = edges.orientation + math.pi / 2.0
    # y grows downward in array coordinates
    dx = np.rint(np.cos(normal)).astype(np.int64)
    dy = -np.rint(np.sin(normal)).astype(np.int64)
    yy, xx = np.mgrid[0:h, 0:w]
    padded = np.pad(s, 1, mode="constant")
    ahead = padded[yy + dy + 1, xx + dx + 1]
    behind = padded[yy - dy + 1, xx - dx + 1]
    keep = (s >= ahead) & (s >= behind)
    return EdgeMap(np.where(keep, s, 0.0), edges.orientation)
