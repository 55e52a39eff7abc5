"""sRGB to CIELAB (D50) conversion and the CIEDE2000 color difference.

Conversion chain: sRGB transfer curve -> linear RGB -> XYZ (D65) -> Bradford
adaptation -> XYZ (D50) -> CIELAB with the D50 reference white.

Every function accepts a single color (a length-3 sequence) or an array of
shape ``(..., 3)``. With numba enabled, the array paths run compiled loops
over the same scalar kernels the edge detector uses; otherwise they fall back
to vectorized numpy.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._jit import NUMBA_ENABLED, njit

# ASTM E308 tabulated whites, Y normalized to 1
D65_WHITE = np.array([0.95047, 1.0, 1.08883])
D50_WHITE = np.array([0.96422, 1.0, 0.82521])

_SRGB_PRIMARIES_XY = np.array([[0.64, 0.33], [0.30, 0.60], [0.15, 0.06]])

_BRADFORD = np.array([
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
])

_EPSILON = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def _srgb_to_xyz_matrix(white):
    xy = _SRGB_PRIMARIES_XY
    prim = np.stack([xy[:, 0] / xy[:, 1], np.ones(3), (1.0 - xy[:, 0] - xy[:, 1]) / xy[:, 1]])
    scale = np.linalg.solve(prim, white)
    return prim * scale


def _bradford_matrix(src_white, dst_white):
    cone_src = _BRADFORD @ src_white
    cone_dst = _BRADFORD @ dst_white
    return np.linalg.inv(_BRADFORD) @ np.diag(cone_dst / cone_src) @ _BRADFORD


# Linear sRGB straight to D50-adapted XYZ; white (1,1,1) lands exactly on D50_WHITE.
RGB_TO_XYZ_D65 = _srgb_to_xyz_matrix(D65_WHITE)
RGB_TO_XYZ_D50 = _bradford_matrix(D65_WHITE, D50_WHITE) @ RGB_TO_XYZ_D65

_M = RGB_TO_XYZ_D50
_M00, _M01, _M02 = float(_M[0, 0]), float(_M[0, 1]), float(_M[0, 2])
_M10, _M11, _M12 = float(_M[1, 0]), float(_M[1, 1]), float(_M[1, 2])
_M20, _M21, _M22 = float(_M[2, 0]), float(_M[2, 1]), float(_M[2, 2])
_XN, _YN, _ZN = (float(v) for v in D50_WHITE)


class RgbColor(NamedTuple):
    r: int
    g: int
    b: int

    @classmethod
    def from_hex(cls, text: str) -> "RgbColor":
        """Parse ``RRGGBB`` (leading ``#`` optional)."""
        s = text.strip().lstrip("#")
        if len(s) != 6:
            raise ValueError(f"expected 6 hex digits, got {text!r}")
        try:
            v = int(s, 16)
        except ValueError:
            raise ValueError(f"invalid hex color {text!r}") from None
        return cls((v >> 16) & 0xFF, (v >> 8) & 0xFF, v & 0xFF)

    def to_hex(self) -> str:
        return f"{self.r:02x}{self.g:02x}{self.b:02x}"


class LabColor(NamedTuple):
    l: float  # noqa: E741
    a: float
    b: float


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------

@njit
def _decode_channel(v):
    c = v / 255.0
    if c <= 0.04045:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


@njit
def _lab_f(t):
    if t > _EPSILON:
        return t ** (1.0 / 3.0)
    return (_KAPPA * t + 16.0) / 116.0


@njit
def rgb_to_lab_scalar(r, g, b):
    """Lab of one sRGB color given as (possibly fractional) 0-255 channels."""
    lr = _decode_channel(r)
    lg = _decode_channel(g)
    lb = _decode_channel(b)
    x = (_M00 * lr + _M01 * lg + _M02 * lb) / _XN
    y = (_M10 * lr + _M11 * lg + _M12 * lb) / _YN
    z = (_M20 * lr + _M21 * lg + _M22 * lb) / _ZN
    fx = _lab_f(x)
    fy = _lab_f(y)
    fz = _lab_f(z)
    return 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)


@njit
def ciede2000_scalar(l1, a1, b1, l2, a2, b2):
    """CIEDE2000 with kL = kC = kH = 1."""
    c1 = math.sqrt(a1 * a1 + b1 * b1)
    c2 = math.sqrt(a2 * a2 + b2 * b2)
    cbar7 = ((c1 + c2) / 2.0) ** 7
    g = 0.5 * (1.0 - math.sqrt(cbar7 / (cbar7 + 25.0 ** 7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = math.sqrt(a1p * a1p + b1 * b1)
    c2p = math.sqrt(a2p * a2p + b2 * b2)

    h1p = 0.0
    if c1p != 0.0:
        h1p = math.degrees(math.atan2(b1, a1p))
        if h1p < 0.0:
            h1p += 360.0
    h2p = 0.0
    if c2p != 0.0:
        h2p = math.degrees(math.atan2(b2, a2p))
        if h2p < 0.0:
            h2p += 360.0

    dlp = l2 - l1
    dcp = c2p - c1p
    cprod = c1p * c2p
    dhp = 0.0
    if cprod != 0.0:
        dhp = h2p - h1p
        if dhp > 180.0:
            dhp -= 360.0
        elif dhp < -180.0:
            dhp += 360.0
    dhp_big = 2.0 * math.sqrt(cprod) * math.sin(math.radians(dhp / 2.0))

    lbarp = (l1 + l2) / 2.0
    cbarp = (c1p + c2p) / 2.0
    if cprod == 0.0:
        hbarp = h1p + h2p
    elif abs(h1p - h2p) <= 180.0:
        hbarp = (h1p + h2p) / 2.0
    elif h1p + h2p < 360.0:
        hbarp = (h1p + h2p + 360.0) / 2.0
    else:
        hbarp = (h1p + h2p - 360.0) / 2.0

    t = (1.0
         - 0.17 * math.cos(math.radians(hbarp - 30.0))
         + 0.24 * math.cos(math.radians(2.0 * hbarp))
         + 0.32 * math.cos(math.radians(3.0 * hbarp + 6.0))
         - 0.20 * math.cos(math.radians(4.0 * hbarp - 63.0)))
    dtheta = 30.0 * math.exp(-(((hbarp - 275.0) / 25.0) ** 2))
    cbarp7 = cbarp ** 7
    rc = 2.0 * math.sqrt(cbarp7 / (cbarp7 + 25.0 ** 7))
    lm = (lbarp - 50.0) ** 2
    sl = 1.0 + 0.015 * lm / math.sqrt(20.0 + lm)
    sc = 1.0 + 0.045 * cbarp
    sh = 1.0 + 0.015 * cbarp * t
    rt = -math.sin(math.radians(2.0 * dtheta)) * rc

    tl = dlp / sl
    tc = dcp / sc
    th = dhp_big / sh
    return math.sqrt(max(tl * tl + tc * tc + th * th + rt * tc * th, 0.0))


@njit
def _rgb_to_lab_loop(rgb):
    n = rgb.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        l, a, b = rgb_to_lab_scalar(rgb[i, 0], rgb[i, 1], rgb[i, 2])
        out[i, 0] = l
        out[i, 1] = a
        out[i, 2] = b
    return out


@njit
def _ciede2000_loop(s1, s2):
    n = s1.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = ciede2000_scalar(s1[i, 0], s1[i, 1], s1[i, 2], s2[i, 0], s2[i, 1], s2[i, 2])
    return out


# ---------------------------------------------------------------------------
# numpy fallbacks
# ---------------------------------------------------------------------------

def _rgb_to_lab_numpy(rgb):
    c = rgb / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ RGB_TO_XYZ_D50.T / D50_WHITE
    f = np.where(xyz > _EPSILON, np.cbrt(xyz), (_KAPPA * xyz + 16.0) / 116.0)
    return np.stack([116.0 * f[:, 1] - 16.0,
                     500.0 * (f[:, 0] - f[:, 1]),
                     200.0 * (f[:, 1] - f[:, 2])], axis=-1)


def _ciede2000_numpy(s1, s2):
    l1, a1, b1 = s1.T
    l2, a2, b2 = s2.T
    c1 = np.hypot(a1, b1)
    c2 = np.hypot(a2, b2)
    cbar7 = ((c1 + c2) / 2.0) ** 7
    g = 0.5 * (1.0 - np.sqrt(cbar7 / (cbar7 + 25.0 ** 7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)
    h1p = np.where(c1p == 0, 0.0, np.degrees(np.arctan2(b1, a1p)) % 360.0)
    h2p = np.where(c2p == 0, 0.0, np.degrees(np.arctan2(b2, a2p)) % 360.0)

    cprod = c1p * c2p
    dhp = h2p - h1p
    dhp = np.where(dhp > 180.0, dhp - 360.0, np.where(dhp < -180.0, dhp + 360.0, dhp))
    dhp = np.where(cprod == 0, 0.0, dhp)
    dhp_big = 2.0 * np.sqrt(cprod) * np.sin(np.radians(dhp / 2.0))

    hsum = h1p + h2p
    hbarp = np.where(np.abs(h1p - h2p) <= 180.0, hsum / 2.0,
                     np.where(hsum < 360.0, (hsum + 360.0) / 2.0, (hsum - 360.0) / 2.0))
    hbarp = np.where(cprod == 0, hsum, hbarp)

    lbarp = (l1 + l2) / 2.0
    cbarp = (c1p + c2p) / 2.0
    t = (1.0
         - 0.17 * np.cos(np.radians(hbarp - 30.0))
         + 0.24 * np.cos(np.radians(2.0 * hbarp))
         + 0.32 * np.cos(np.radians(3.0 * hbarp + 6.0))
         - 0.20 * np.cos(np.radians(4.0 * hbarp - 63.0)))
    dtheta = 30.0 * np.exp(-(((hbarp - 275.0) / 25.0) ** 2))
    cbarp7 = cbarp ** 7
    rc = 2.0 * np.sqrt(cbarp7 / (cbarp7 + 25.0 ** 7))
    lm = (lbarp - 50.0) ** 2
    sl = 1.0 + 0.015 * lm / np.sqrt(20.0 + lm)
    sc = 1.0 + 0.045 * cbarp
    sh = 1.0 + 0.015 * cbarp * t
    rt = -np.sin(np.radians(2.0 * dtheta)) * rc
    tl = (l2 - l1) / sl
    tc = (c2p - c1p) / sc
    th = dhp_big / sh
    return np.sqrt(np.maximum(tl * tl + tc * tc + th * th + rt * tc * th, 0.0))


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def _as_triples(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension of 3, got shape {arr.shape}")
    return arr


def rgb_to_lab(rgb):
    """Convert sRGB (0-255 per channel) to CIELAB under D50.

    Returns a :class:`LabColor` for a single color and an ``(..., 3)`` array
    otherwise.
    """
    arr = _as_triples(rgb)
    if np.any((arr < 0) | (arr > 255)):
        raise ValueError("RGB channels must lie in [0, 255]")
    flat = np.ascontiguousarray(arr.reshape(-1, 3))
    out = _rgb_to_lab_loop(flat) if NUMBA_ENABLED else _rgb_to_lab_numpy(flat)
    if arr.ndim == 1:
        return LabColor(*(float(v) for v in out[0]))
    return out.reshape(arr.shape)


def ciede2000(s1, s2):
    """CIEDE2000 color difference between Lab colors (broadcasts over arrays)."""
    a, b = np.broadcast_arrays(_as_triples(s1), _as_triples(s2))
    shape = a.shape[:-1]
    fa = np.ascontiguousarray(a.reshape(-1, 3))
    fb = np.ascontiguousarray(b.reshape(-1, 3))
    out = _ciede2000_loop(fa, fb) if NUMBA_ENABLED else _ciede2000_numpy(fa, fb)
    if not shape:
        return float(out[0])
    return out.reshape(shape)


def thresholded(delta, T):
    if not T > 0:
        raise ValueError(f"threshold T must be positive, got {T}")
    return np.minimum(delta, T) / T


def d1(s1, s2, T=20.0):
    """Thresholded, rescaled CIEDE2000: ``min(dE00, T) / T`` in [0, 1]."""
    return thresholded(ciede2000(s1, s2), T)
