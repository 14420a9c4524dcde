"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is made at import
time from SPECRECOVER_DISABLE_NUMBA. Usage:

    python3 benchmarks/bench_kernels.py [--n 32] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from specrecover import _kernels
from specrecover.model import InstanceConfig, draw_instance, nominal_separation
from specrecover.sdp import SolverParams, solve_primal
from specrecover.certificate import DualPolynomial, localize
from specrecover.recovery import recover

n, repeat = int(sys.argv[1]), int(sys.argv[2])
cfg = InstanceConfig(n, max(2, n // 3), 4, 0, nominal_separation(n), master_seed=11)
inst = draw_instance(cfg, 0)
gen = np.random.default_rng(0).standard_normal(n) + 0j
params = SolverParams(max_iters=300, eps_abs=1e-12, eps_rel=1e-12)  # fixed iteration count

def best(fn, k=repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(k):
        t = time.perf_counter(); fn(); times.append(time.perf_counter() - t)
    return min(times)

out = {"backend": _kernels.BACKEND}
out["toeplitz_expand"] = best(lambda: [_kernels.toeplitz_expand(gen) for _ in range(200)]) / 200
mat = _kernels.toeplitz_expand(gen)
out["diagonal_sums"] = best(lambda: [_kernels.diagonal_sums(mat) for _ in range(200)]) / 200
out["admm_300_iters"] = best(lambda: solve_primal(inst, params))
q = np.random.default_rng(1).standard_normal(inst.m) + 0j
poly = DualPolynomial(q / np.abs(q).sum(), inst.observed)
out["localize"] = best(lambda: localize(poly, band=1e-2))
out["recover"] = best(lambda: recover(inst), k=max(1, repeat // 2))
print(json.dumps(out))
"""


def run(disable: bool, n: int, repeat: int) -> dict:
    env = dict(os.environ, SPECRECOVER_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", CHILD, str(n), str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = run(False, args.n, args.repeat)
    slow = run(True, args.n, args.repeat)
    print(f"n={args.n}  backends: {fast['backend']} vs {slow['backend']}")
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:<18}{a:>12.3f}{b:>12.3f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
