"""Time the batched LTL kernel on both backends.

    python3 benchmarks/bench_kernels.py [--rows N] [--repeat R]

Both backends are checked for identical results before timing.
"""
import argparse
import random
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from domsynth import kernels  # noqa: E402
from domsynth.ltl import parse_ltl  # noqa: E402

from oracles import random_formula  # noqa: E402

FIXED = ["G (a -> F b)", "(G F a) -> (G F b)", "a U (b R !a)", "F G (a <-> X b)"]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--stem", type=int, default=4)
    ap.add_argument("--loop", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    letters = rng.integers(0, 4, size=(args.rows, args.stem + args.loop), dtype=np.int64)
    var_index = {"a": 0, "b": 1}
    pyrng = random.Random(0)
    formulas = [parse_ltl(t) for t in FIXED] + [random_formula(pyrng, ["a", "b"], 4) for _ in range(4)]
    progs = [kernels.compile_formula(f, var_index) for f in formulas]

    if kernels.HAVE_NUMBA:
        kernels.evaluate_batch(progs[0], letters[:10], args.stem, "numba")  # compile
    print(f"rows={args.rows} length={args.stem}+{args.loop} formulas={len(progs)}")
    print(f"{'formula':<40} {'numpy s':>9} {'numba s':>9} {'speedup':>8}")
    for f, prog in zip(formulas, progs):
        t_np = best_of(lambda: kernels.evaluate_batch(prog, letters, args.stem, "numpy"), args.repeat)
        if kernels.HAVE_NUMBA:
            a = kernels.evaluate_batch(prog, letters, args.stem, "numpy")
            b = kernels.evaluate_batch(prog, letters, args.stem, "numba")
            if not np.array_equal(a, b):
                raise SystemExit(f"backends disagree on {f}")
            t_nb = best_of(lambda: kernels.evaluate_batch(prog, letters, args.stem, "numba"), args.repeat)
            speed = f"{t_np / t_nb:7.1f}x"
            t_nb = f"{t_nb:9.4f}"
        else:
            t_nb, speed = f"{'n/a':>9}", f"{'':>8}"
        text = str(f)
        text = text if len(text) <= 40 else text[:37] + "..."
        print(f"{text:<40} {t_np:9.4f} {t_nb} {speed}")


if __name__ == "__main__":
    main()
