"""Compare the compiled and pure-Python search kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload is run on both backends; results must agree before timings are
reported.  Without the compiled extension only the Python column is filled.
"""

import argparse
import random
import statistics
import time

from catwork import kernels
from catwork.baf import A, E, TruncationParams, build_tree
from catwork.coders import build_boxes, build_warmup
from catwork.effective import CeSetSpec, MonotoneApprox
from catwork.logic import ef_equivalent
from catwork.search import find_isomorphisms
from catwork.structures import random_structure, scramble


def _boxes_all_isos(backend):
    a = MonotoneApprox([[0, 1, 2]], [[0, 1, 2]], 2)
    pair = build_boxes(a, w=2, tail=1)
    return len(find_isomorphisms(pair.M, pair.N, cap=10**5, backend=backend))


def _warmup_first_iso(backend):
    pair = build_warmup(CeSetSpec.random(random.Random(1), 6, 10))
    copy, _ = scramble(pair.N, 3)
    return len(find_isomorphisms(pair.M, copy, limit=1, cap=10**5, backend=backend))


def _tree_automorphisms(backend):
    s = build_tree(E(3), TruncationParams(w=2, n_max=3)).to_structure()
    return len(find_isomorphisms(s, s, cap=10**5, backend=backend))


def _ef_trees(backend):
    t = TruncationParams(w=1, n_max=3)
    a = build_tree(A(3), t).to_structure()
    b = build_tree(E(3), t).to_structure()
    return [ef_equivalent(a, b, k, cap=10**5, backend=backend) for k in (1, 2, 3)]


def _ef_random(backend):
    rng = random.Random(7)
    out = []
    for _ in range(40):
        a = random_structure(rng, 6)
        b = random_structure(rng, 6)
        out.append(ef_equivalent(a, b, 3, backend=backend))
    return out


WORKLOADS = {
    "iso: all box isomorphisms": _boxes_all_isos,
    "iso: first warmup isomorphism": _warmup_first_iso,
    "iso: tree automorphisms": _tree_automorphisms,
    "ef: tree pairs, k<=3": _ef_trees,
    "ef: 40 random pairs, k=3": _ef_random,
}


def timed(fn, backend, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(backend)
        times.append(time.perf_counter() - t0)
    return result, statistics.median(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.insert(0, ("cython", kernels.compiled_backend))
    else:
        print("compiled kernels unavailable; timing the Python fallback only")
    header = f"{'workload':34s}" + "".join(f"{n:>10s}" for n, _ in backends)
    print(header + (f"{'speedup':>10s}" if len(backends) == 2 else ""))
    for name, fn in WORKLOADS.items():
        rows = [timed(fn, b, args.repeat) for _, b in backends]
        if len({repr(r) for r, _ in rows}) != 1:
            raise SystemExit(f"{name}: backends disagree: {[r for r, _ in rows]}")
        line = f"{name:34s}" + "".join(f"{t * 1e3:8.1f}ms" for _, t in rows)
        if len(rows) == 2:
            line += f"{rows[1][1] / max(rows[0][1], 1e-9):9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
