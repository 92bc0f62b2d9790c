"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--max-len 12] [--repeat 3]

Both backends run in the same process (the numpy path is forced per call),
and their outputs are compared before timing is reported.
"""

import argparse
import time

import numpy as np

from cuspcurrents import _kernels
from cuspcurrents.fuchsian import preset_gamma2, words_up_to
from cuspcurrents.geom import Geodesic
from cuspcurrents.intersect import dedup_angle_pairs

P = preset_gamma2()
GENS = _kernels.generator_array(P.generators)
GEO = Geodesic.parse("1-sqrt(2)", "1+sqrt(2)").projective()


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_enumerate(max_len, repeat):
    params = np.array([0.0, 1.0, 2.0])  # ball about i with sinh(R) = 2
    if _kernels.HAVE_NUMBA:
        _kernels.enumerate_hits(GENS, GEO, 3, 0, params)  # compile
    t_nb, r_nb = best_of(lambda: _kernels.enumerate_hits(GENS, GEO, max_len, 0, params), repeat)
    t_np, r_np = best_of(lambda: _kernels.enumerate_hits(GENS, GEO, max_len, 0, params, force_numpy=True), repeat)
    # float drift along long words reaches ~1e-6, so compare deduplicated hits
    a, b = dedup_angle_pairs(*r_nb), dedup_angle_pairs(*r_np)
    same = len(a) == len(b) and all(abs(p - q) < 1e-4 for u, v in zip(a, b) for p, q in zip(u, v))
    return t_nb, t_np, len(r_nb[0]), same


def bench_ball(repeat):
    words = words_up_to(7)
    mats = np.array([P.float_matrix(w) for w in words])
    geos = np.array([GEO] * 64)
    args = (mats, geos, 0.0, 1.0, 2.0)
    _kernels.translates_meet_ball(*args)
    t_nb, a = best_of(lambda: _kernels.translates_meet_ball(*args), repeat)
    t_np, b = best_of(lambda: _kernels.translates_meet_ball(*args, force_numpy=True), repeat)
    return t_nb, t_np, mats.shape[0] * geos.shape[0], bool(np.array_equal(a, b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-len", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"backend: {_kernels.backend()}")
    t_nb, t_np, n, same = bench_enumerate(args.max_len, args.repeat)
    print(f"enumerate_hits  len<={args.max_len}: numba {t_nb:.3f}s  numpy {t_np:.3f}s  speedup {t_np / t_nb:5.1f}x  hits {n}  agree {same}")
    t_nb, t_np, n, same = bench_ball(args.repeat)
    print(f"translates_meet_ball {n} pairs: numba {t_nb * 1e3:.2f}ms  numpy {t_np * 1e3:.2f}ms  speedup {t_np / t_nb:5.1f}x  agree {same}")


if __name__ == "__main__":
    main()
