"""Compare the numba and numpy kernels of the grid oracle.

    python3 benchmarks/bench_kernels.py --resolutions 100 200 400

Both paths run on the same payoff table; the script checks they return the
same top candidates before reporting timings.
"""

import argparse
import time

import numpy as np

from anongame import GameParams, build_tensor
from anongame import _kernels


def _best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolutions", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--value", type=float, default=50.0)
    ap.add_argument("--limit", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--batch", type=int, default=200_000)
    args = ap.parse_args(argv)

    if not _kernels.HAS_NUMBA:
        print("numba unavailable or disabled; only the numpy path is timed")
    U = build_tensor(GameParams().with_value(args.value)).array
    # warm the JIT cache so compile time is not counted
    if _kernels.HAS_NUMBA:
        _kernels.grid_topk(U, 4, 2, use_numba=True)

    print(f"{'kernel':<16}{'size':>10}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for res in args.resolutions:
        t_np, (r_np, i_np) = _best_of(
            lambda: _kernels.grid_topk(U, res, args.limit, use_numba=False), args.repeat)
        if _kernels.HAS_NUMBA:
            t_nb, (r_nb, i_nb) = _best_of(
                lambda: _kernels.grid_topk(U, res, args.limit, use_numba=True), args.repeat)
            assert np.allclose(r_nb, r_np, rtol=0, atol=1e-12), "kernels disagree"
            print(f"{'grid_topk':<16}{res:>10}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")
        else:
            print(f"{'grid_topk':<16}{res:>10}{'-':>12}{t_np:>12.4f}{'-':>10}")

    rng = np.random.default_rng(0)
    n = args.batch
    p1, p2 = rng.random(n), rng.random(n)
    q = rng.dirichlet(np.ones(3), size=n)
    if _kernels.HAS_NUMBA:
        _kernels.profile_regrets(U, p1[:2], p2[:2], q[:2], use_numba=True)
    t_np, a = _best_of(lambda: _kernels.profile_regrets(U, p1, p2, q, use_numba=False),
                       args.repeat)
    if _kernels.HAS_NUMBA:
        t_nb, b = _best_of(lambda: _kernels.profile_regrets(U, p1, p2, q, use_numba=True),
                           args.repeat)
        assert np.allclose(a, b, atol=1e-12)
        print(f"{'profile_regrets':<16}{n:>10}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")
    else:
        print(f"{'profile_regrets':<16}{n:>10}{'-':>12}{t_np:>12.4f}{'-':>10}")


if __name__ == "__main__":
    main()
