import math

import numpy as np
import pytest

from coldist.compass import (EdgeMap, EmptyHalfDisc, Signature, build_signature, compass_response,
                             detect_edges, disc_layout, orientation_angles, signature_distance, thin)
from coldist.metric import MetricParams, make_metric, represent

A = (30, 60, 200)
B = (220, 120, 40)


def step_image(size=128, a=A, b=B, split=64):
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:, :split] = a
    img[:, split:] = b
    return img


@pytest.fixture(scope="module")
def metrics(table, ground):
    return {name: make_metric(name, MetricParams(), ground) for name in ("coldist", "tc", "ne")}


@pytest.fixture(scope="module")
def step_edges(table, metrics):
    img = step_image()
    return {name: detect_edges(img, m, table) for name, m in metrics.items()}


def test_layout_halves_are_mirror_images():
    offsets, sides = disc_layout(8, 12)
    assert offsets.shape[0] == 197  # lattice points with dy^2 + dx^2 <= 64
    center = np.flatnonzero((offsets == 0).all(axis=1))[0]
    assert np.all(sides[:, center] == 0)
    for row in sides:
        assert (row == 1).sum() == (row == -1).sum()
    # vertical dividing line: left and right columns fall on opposite sides
    k = 6
    assert orientation_angles(12)[k] == pytest.approx(math.pi / 2)
    left = offsets[:, 1] < 0
    right = offsets[:, 1] > 0
    assert len(set(sides[k][left])) == 1 and len(set(sides[k][right])) == 1
    assert sides[k][left][0] == -sides[k][right][0]
    assert np.all(sides[k][offsets[:, 1] == 0] == 0)


def test_constant_image_is_zero(table, metrics):
    img = np.full((20, 20, 3), 77, dtype=np.uint8)
    for m in metrics.values():
        edges = detect_edges(img, m, table, radius=4)
        assert np.all(edges.strength == 0.0)
        assert np.all(edges.to_gray8() == 0)


def test_uniform_region_center_is_zero(table, metrics):
    img = step_image()
    s, _ = compass_response(img, (64, 20), metrics["coldist"], table)
    assert s == 0.0


@pytest.mark.parametrize("name", ["coldist", "tc", "ne"])
def test_step_edge_location_and_orientation(step_edges, metrics, table, name):
    edges = step_edges[name]
    s = edges.strength
    col = int(np.argmax(s.mean(axis=0)))
    assert col in (63, 64)
    mid = s[32:96]
    assert np.allclose(edges.orientation[32:96, 63:65], math.pi / 2)
    # both halves are pure: the response is the pair distance minus the floor
    m = metrics[name]
    expected = m(represent(A, table), represent(B, table)) - m.floor
    assert mid[:, 63:65].max() == pytest.approx(expected, abs=1e-12)
    assert s.max() <= m.supremum - m.floor + 1e-12


def test_coldist_and_ne_peak_together(step_edges):
    peaks = {n: int(np.argmax(step_edges[n].strength.mean(axis=0))) for n in ("coldist", "ne")}
    assert peaks["coldist"] == peaks["ne"]


def test_rotated_step(table, metrics, step_edges):
    img = np.ascontiguousarray(np.rot90(step_image()))
    edges = detect_edges(img, metrics["coldist"], table)
    row = int(np.argmax(edges.strength.mean(axis=1)))
    assert abs(row - (127 - int(np.argmax(step_edges["coldist"].strength.mean(axis=0))))) <= 1
    step = math.pi / 12
    theta = edges.orientation[row, 32:96]
    assert np.all(np.minimum(theta, math.pi - theta) <= step / 2)


def test_color_swap_symmetry(table, metrics, step_edges):
    swapped = detect_edges(step_image(a=B, b=A), metrics["coldist"], table)
    assert np.allclose(swapped.strength, step_edges["coldist"].strength, atol=1e-12)


def test_deterministic(table, metrics, step_edges):
    again = detect_edges(step_image(), metrics["coldist"], table)
    assert np.array_equal(again.strength, step_edges["coldist"].strength)
    assert np.array_equal(again.orientation, step_edges["coldist"].orientation)


def test_python_path_matches_kernel(table, metrics, rng):
    img = rng.integers(0, 256, (24, 24, 3), dtype=np.uint8)
    m = metrics["coldist"]
    s, theta = compass_response(img, (12, 11), m, table, radius=5, orientations=8)
    k = int(round(theta / (math.pi / 8)))
    s1 = build_signature(img, (12, 11), 5, 1, k, 8, table)
    s2 = build_signature(img, (12, 11), 5, -1, k, 8, table)
    assert signature_distance(s1, s2, m) == pytest.approx(s, abs=1e-12)
    for j in range(8):
        a = build_signature(img, (12, 11), 5, 1, j, 8, table)
        b = build_signature(img, (12, 11), 5, -1, j, 8, table)
        assert signature_distance(a, b, m) <= s + 1e-12


def test_signature_contents(table):
    img = step_image(size=32, split=16)
    uniform = build_signature(img, (16, 4), 3, 1, 0, 12, table)
    assert len(uniform) == 1 and uniform.weights[0] == 1.0
    # a diagonal dividing line through the edge sees both colors on each side
    mixed = build_signature(img, (16, 16), 4, 1, 3, 12, table)
    assert len(mixed) == 2
    assert mixed.weights.sum() == pytest.approx(1.0)
    vert = build_signature(img, (16, 16), 4, 1, 6, 12, table)
    assert len(vert) == 1


def test_signature_at_corner_and_empty_half(table):
    img = np.zeros((10, 10, 3), dtype=np.uint8)
    sig = build_signature(img, (0, 0), 3, -1, 0, 12, table)
    assert sig.weights.sum() == pytest.approx(1.0)
    # horizontal line at the top row: the upper half lies outside the image
    with pytest.raises(EmptyHalfDisc):
        build_signature(img, (0, 5), 3, 1, 0, 12, table)


def test_signature_validation():
    with pytest.raises(ValueError):
        Signature([], np.array([]))
    with pytest.raises(ValueError):
        Signature([object()], np.array([0.5]))


def test_small_image_rejected(table, metrics):
    with pytest.raises(ValueError, match="too small"):
        detect_edges(np.zeros((16, 40, 3), dtype=np.uint8), metrics["ne"], table, radius=8)


def test_thin_keeps_ridge(step_edges):
    thinned = thin(step_edges["coldist"])
    s = thinned.strength
    assert np.count_nonzero(s[64]) <= 4
    assert s[64, 63:65].max() == step_edges["coldist"].strength[64].max()


def test_to_gray8_scaling():
    e = EdgeMap(np.array([[0.0, 0.25], [0.5, 1.0]]), np.zeros((2, 2)))
    assert e.to_gray8().tolist() == [[0, 64], [128, 255]]
