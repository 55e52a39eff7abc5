"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_numba.py [--repeat 3]

Each path runs in its own interpreter because the choice is made at import
time (``COLDIST_DISABLE_NUMBA``). Compilation is excluded: every workload is
run once before timing.
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from coldist import _jit
from coldist.colorspace import ciede2000, rgb_to_lab
from coldist.compass import detect_edges
from coldist.emd import emd
from coldist.metric import MetricParams, make_metric
from coldist.naming import fallback_table, learn_ground_distance

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
table = fallback_table()
D = learn_ground_distance(table, 0.7)
lab = rgb_to_lab(rng.integers(0, 256, (20000, 3)))
hists = rng.dirichlet(np.ones(11), (200, 2))
img = np.zeros((48, 48, 3), dtype=np.uint8)
img[:, :24] = (30, 60, 200)
img[:, 24:] = (220, 120, 40)
img = (img + rng.integers(-2, 3, img.shape)).clip(0, 255).astype(np.uint8)
coldist = make_metric("coldist", MetricParams(), D)

work = {
    "ciede2000 x10000": lambda: ciede2000(lab[:10000], lab[10000:]),
    "emd 11x11 x200": lambda: [emd(p, q, D) for p, q in hists],
    "compass 48x48 r=6": lambda: detect_edges(img, coldist, table, radius=6),
}
out = {"numba": _jit.NUMBA_ENABLED}
for name, fn in work.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ)
    env.pop("COLDIST_DISABLE_NUMBA", None)
    if disable:
        env["COLDIST_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'workload':<22}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name in fast:
        if name == "numba":
            continue
        print(f"{name:<22}{fast[name]:>12.4f}{slow[name]:>12.4f}{slow[name] / fast[name]:>9.1f}x")


if __name__ == "__main__":
    main()
