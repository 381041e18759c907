"""Compare the compiled and pure-Python monomial kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 20000]

Micro-benchmarks feed both implementations identical random monomials; the
end-to-end run times ``mc-check`` on pure gravity (N=11, K=5) in a fresh interpreter
with and without ``BVHIER_PURE_PYTHON``.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from bvhier import _kernels_py
from bvhier.diffring import DER_STEP, FROZEN_FROM, Kind, encode

try:
    from bvhier import _kernels as _compiled
except ImportError:
    _compiled = None


def random_monomial(rng, size):
    """Nonzero canonical monomial; repeated odd factors are redrawn."""
    while True:
        codes = [
            encode(rng.choice([Kind.B, Kind.ETA]), rng.randrange(2), rng.randrange(3), rng.randrange(3))
            for _ in range(size)
        ]
        sign, mono = _kernels_py.canonicalize(codes)
        if sign:
            return mono


def workloads(rng, n):
    raw = [[encode(rng.choice([Kind.B, Kind.ETA]), rng.randrange(2), rng.randrange(3), rng.randrange(3))
            for _ in range(rng.randrange(1, 8))] for _ in range(n)]
    monos = [random_monomial(rng, rng.randrange(1, 7)) for _ in range(n)]
    pairs = list(zip(monos, reversed(monos)))
    gens = [m[0] for m in monos]

    def canon(k):
        for r in raw:
            k.canonicalize(r)

    def mul(k):
        for a, b in pairs:
            k.mul(a, b)

    def partial(k):
        for m, g in zip(monos, gens):
            k.left_partial(m, g)
            k.right_partial(m, g)

    def zder(k):
        for m in monos:
            k.z_derivative(m, DER_STEP, FROZEN_FROM)

    return {"canonicalize": canon, "mul": mul, "partials": partial, "z_derivative": zder}


def end_to_end(pure: bool) -> float:
    env = dict(os.environ)
    env.pop("BVHIER_PURE_PYTHON", None)
    if pure:
        env["BVHIER_PURE_PYTHON"] = "1"
    code = (
        "import time;from bvhier.cli import run;t=time.perf_counter();"
        "run(['mc-check', 'data/phase_kdv.json', '--trunc', '11,5,11,2']);"
        "print(time.perf_counter()-t)"
    )
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = subprocess.run([sys.executable, "-c", code], env=env, cwd=root, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled kernels are not built; only the fallback is available")
    impls = {"python": _kernels_py}
    if _compiled is not None:
        impls["cython"] = _compiled
    jobs = workloads(random.Random(args.seed), args.size)
    print(f"{'kernel':<14}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for name, job in jobs.items():
        times = {k: min(timeit.repeat(lambda: job(m), number=1, repeat=args.repeat)) for k, m in impls.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<14}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times.values()) + f"{speed:>9.2f}x")
    py = end_to_end(True)
    line = f"{'mc-check N=11':<14}{py * 1e3:>10.1f}ms"
    if _compiled is not None:
        cy = end_to_end(False)
        line = f"{'mc-check N=11':<14}{py * 1e3:>10.1f}ms{cy * 1e3:>10.1f}ms{py / cy:>9.2f}x"
    print(line)


if __name__ == "__main__":
    main()
