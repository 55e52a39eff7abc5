"""The compiled kernels and the interpreted fallback must agree."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from coldist import _jit

PROBE = r"""
import json
import numpy as np
from coldist import _jit
from coldist.colorspace import ciede2000, rgb_to_lab
from coldist.compass import detect_edges
from coldist.emd import emd
from coldist.metric import MetricParams, make_metric
from coldist.naming import fallback_table, learn_ground_distance

rng = np.random.default_rng(7)
rgb = rng.integers(0, 256, (40, 3))
lab = rgb_to_lab(rgb)
de = ciede2000(lab[:20], lab[20:])
p = rng.dirichlet(np.ones(6), 10)
q = rng.dirichlet(np.ones(6), 10)
cost = rng.uniform(0, 1, (6, 6))
emds = [emd(a, b, cost) for a, b in zip(p, q)]
table = fallback_table()
D = learn_ground_distance(table, 0.7)
img = rng.integers(0, 256, (12, 12, 3), dtype=np.uint8)
img[:, 6:] //= 4
edges = detect_edges(img, make_metric("coldist", MetricParams(), D), table, radius=3, orientations=4)
print(json.dumps({"numba": _jit.NUMBA_ENABLED, "lab": lab.tolist(), "de": np.asarray(de).tolist(),
                  "emd": emds, "strength": edges.strength.tolist(),
                  "orientation": edges.orientation.tolist()}))
"""


def probe(disable):
    env = dict(os.environ)
    env.pop("COLDIST_DISABLE_NUMBA", None)
    if disable:
        env["COLDIST_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


@pytest.fixture(scope="module")
def both():
    return probe(False), probe(True)


def test_flag_selects_path(both):
    fast, slow = both
    assert fast["numba"] is True
    assert slow["numba"] is False


@pytest.mark.parametrize("key", ["lab", "de", "emd", "strength"])
def test_paths_agree(both, key):
    fast, slow = both
    np.testing.assert_allclose(np.asarray(fast[key]), np.asarray(slow[key]), rtol=0, atol=1e-12)


def test_orientations_agree(both):
    fast, slow = both
    assert fast["orientation"] == slow["orientation"]


def test_py_func_unwraps():
    from coldist.metric import squash

    assert _jit.py_func(squash)(0.5, 10.0) == 0.5
