"""COL_DIST and the two baseline color differences.

COL_DIST blends a thresholded CIEDE2000 term with the EMD between basic color
term distributions, then passes the blend through a logistic squashing::

    d1 = min(dE00, T) / T
    d2 = EMD(p1, p2; D)
    d3 = alpha * d1 + (1 - alpha) * d2
    col_dist = 1 / (1 + exp(-(Z * d3 - Z / 2)))

The logistic is applied verbatim, so the self-distance is not zero but
``1 / (1 + exp(Z / 2))`` (about 0.0066929 for Z = 10). Consumers that need a
true zero should subtract :attr:`ColorDifference.floor`.

The baselines are the negative-exponent Euclidean distance
``1 - exp(-||s1 - s2|| / gamma)`` ("ne") and the thresholded CIEDE2000 ``d1``
alone ("tc").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._jit import njit
from .colorspace import LabColor, ciede2000_scalar, rgb_to_lab
from .emd import emd, emd_kernel
from .naming import GroundMatrix, NamingTable, term_probabilities

METRICS = ("coldist", "tc", "ne", "ciede2000")
_CODES = {name: i for i, name in enumerate(METRICS)}


@dataclass(frozen=True)
class MetricParams:
    T: float = 20.0
    alpha: float = 0.5
    Z: float = 10.0
    gamma: float = 14.0
    t: float = 0.7

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.Z > 0:
            raise ValueError(f"Z must be positive, got {self.Z}")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 < self.t <= 1:
            raise ValueError(f"t must lie in (0, 1], got {self.t}")

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True, eq=False)
class ColorRepr:
    """A color as its Lab coordinates plus its term probability vector."""

    s: LabColor
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-6:
            raise ValueError("p must be a probability vector")
        object.__setattr__(self, "s", LabColor(*(float(v) for v in self.s)))
        object.__setattr__(self, "p", p)


def represent(c, table: NamingTable) -> ColorRepr:
    """Lab coordinates and term probabilities of an sRGB color."""
    return ColorRepr(rgb_to_lab(c), term_probabilities(table, c))


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------

@njit
def squash(d3, Z):
    """Logistic map sending d3 in [0, 1] to (0, 1), centered at d3 = 1/2."""
    return 1.0 / (1.0 + math.exp(-(Z * d3 - Z / 2.0)))


@njit
def _euclid(l1, a1, b1, l2, a2, b2):
    return math.sqrt((l1 - l2) ** 2 + (a1 - a2) ** 2 + (b1 - b2) ** 2)


@njit
def term_emd(p1, p2, D):
    same = True
    for k in range(p1.shape[0]):
        if p1[k] != p2[k]:
            same = False
            break
    if same:
        return 0.0
    return emd_kernel(p1, p2, D)


@njit
def pair_distance(code, s1, p1, s2, p2, T, alpha, Z, gamma, D):
    """Distance between two (Lab, term-probability) colors for a metric code."""
    if code == 2:
        return 1.0 - math.exp(-_euclid(s1[0], s1[1], s1[2], s2[0], s2[1], s2[2]) / gamma)
    de = ciede2000_scalar(s1[0], s1[1], s1[2], s2[0], s2[1], s2[2])
    if code == 3:
        return de
    d1 = min(de, T) / T
    if code == 1:
        return d1
    d2 = 0.0
    if alpha < 1.0:
        d2 = term_emd(p1, p2, D)
    return squash(alpha * d1 + (1.0 - alpha) * d2, Z)


# ---------------------------------------------------------------------------
# public functions
# ---------------------------------------------------------------------------

def d2(p1, p2, D) -> float:
    """EMD between term probability vectors under the ground matrix ``D``."""
    return emd(p1, p2, D)


def d3(v1: ColorRepr, v2: ColorRepr, params: MetricParams = MetricParams(), D=None) -> float:
    """``alpha * d1 + (1 - alpha) * d2``."""
    dist1 = min(ciede2000_scalar(*v1.s, *v2.s), params.T) / params.T
    if params.alpha == 1.0:
        return float(dist1)
    dist2 = d2(v1.p, v2.p, _ground(D))
    return float(params.alpha * dist1 + (1.0 - params.alpha) * dist2)


def col_dist(v1: ColorRepr, v2: ColorRepr, params: MetricParams = MetricParams(), D=None) -> float:
    return float(squash(d3(v1, v2, params, D), params.Z))


def ne_dist(s1, s2, gamma=14.0) -> float:
    """Negative-exponent Euclidean Lab distance, in [0, 1)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return float(1.0 - math.exp(-_euclid(*s1, *s2) / gamma))


def tc_dist(s1, s2, T=20.0) -> float:
    """Thresholded CIEDE2000, ``min(dE00, T) / T``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    return float(min(ciede2000_scalar(*s1, *s2), T) / T)


def _ground(D):
    if D is None:
        raise ValueError("COL_DIST needs a ground matrix D over the color terms")
    return D


class ColorDifference:
    """A named, symmetric distance between :class:`ColorRepr` values.

    Subclasses expose ``code`` and ``kernel_args`` so compiled code (the
    compass detector) can evaluate the same distance without calling back
    into Python.
    """

    name = ""
    code = -1

    def __init__(self, params: MetricParams = MetricParams(), D: GroundMatrix | None = None):
        self.params = params
        self.D = D

    def __call__(self, v1: ColorRepr, v2: ColorRepr) -> float:
        s1 = np.asarray(v1.s)
        s2 = np.asarray(v2.s)
        return float(pair_distance(self.code, s1, v1.p, s2, v2.p, *self.kernel_args()))

    def kernel_args(self):
        p = self.params
        D = np.ascontiguousarray(self.D.d) if self.D is not None else np.zeros((1, 1))
        return p.T, p.alpha, p.Z, p.gamma, D

    @property
    def floor(self) -> float:
        """Distance of any color to itself."""
        return 0.0

    @property
    def supremum(self) -> float:
        return 1.0

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"


class ColDist(ColorDifference):
    name = "coldist"
    code = _CODES["coldist"]

    def __init__(self, params=MetricParams(), D=None):
        super().__init__(params, _ground(D) if params.alpha < 1.0 else D)

    def __call__(self, v1, v2):
        return col_dist(v1, v2, self.params, self.D)

    @property
    def floor(self):
        return float(squash(0.0, self.params.Z))

    @property
    def supremum(self):
        return float(squash(1.0, self.params.Z))


class ThresholdedCiede2000(ColorDifference):
    name = "tc"
    code = _CODES["tc"]


class NegativeExponent(ColorDifference):
    name = "ne"
    code = _CODES["ne"]


class Ciede2000Distance(ColorDifference):
    name = "ciede2000"
    code = _CODES["ciede2000"]

    @property
    def supremum(self):
        return math.inf


_CLASSES = {cls.name: cls for cls in (ColDist, ThresholdedCiede2000, NegativeExponent, Ciede2000Distance)}


def make_metric(name: str, params: MetricParams = MetricParams(), D: GroundMatrix | None = None) -> ColorDifference:
    try:
        cls = _CLASSES[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {', '.join(METRICS)}") from None
    return cls(params, D)
