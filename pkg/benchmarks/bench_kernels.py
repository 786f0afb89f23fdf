"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from xlstr import _pykernels
from xlstr.synthetic import synth_dataset

try:
    from xlstr import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    ds = synth_dataset("eng", "train", 200, seed=7)
    pairs = [(i.sent1.casefold(), i.sent2.casefold()) for i in ds.instances]
    rng = np.random.default_rng(0)
    vals = np.round(rng.random(20000), 2)
    X = rng.random((4096, 6))
    y = rng.random(4096)
    order = rng.permutation(4096).astype(np.intp)

    def ngram(mod):
        return lambda: [mod.ngram_cosine(a, b, 3) for a, b in pairs]

    def ranks(mod):
        return lambda: mod.average_ranks(vals)

    def sgd(mod):
        return lambda: mod.sgd_batches(X, y, order, 0, 128, 32, np.zeros(6), 0.0, 0.1, 1e-3)

    return [("ngram_cosine x200", ngram), ("average_ranks n=20000", ranks), ("sgd_batches 128x32", sgd)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<24}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, make in cases():
        py = min(timeit.repeat(make(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<24}{py:>12.3f}{'n/a':>12}{'':>10}")
            continue
        cy = min(timeit.repeat(make(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<24}{py:>12.3f}{cy:>12.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
