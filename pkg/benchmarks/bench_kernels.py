"""Time the compiled kernels against the NumPy fallback and check they agree.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from itesel import _kernels
from itesel.learners import fit_gbt
from itesel.learners.elastic_net import standardize


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=500)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.normal(size=(args.n, 13))
    y = np.sin(X[:, 0]) + X[:, 1] * X[:, 2] + rng.normal(size=args.n)
    prob = standardize(X, y)
    lams = np.exp(np.linspace(2, -5, 20))

    def path(be):
        beta, q = np.zeros(13), np.zeros(13)
        for lam in lams:
            be.coordinate_descent(prob.G, prob.c, beta, q, 0.5 * lam, 0.5 * lam, 1e-7, 10000)
        return beta.copy()

    backends = [("python", _kernels.python_backend)]
    if _kernels.compiled_backend is not None:
        backends.insert(0, ("compiled", _kernels.compiled_backend))
    else:
        print("compiled kernels not built; timing the fallback only")

    results = {}
    print(f"{'task':32} {'backend':>9} {'seconds':>10}")
    for name, be in backends:
        t_fit, ens = best_of(lambda: fit_gbt(X, y, n_trees=500, backend=be), args.repeat)
        t_pred, pred = best_of(lambda: be.predict_trees(
            X, ens.feature, ens.threshold, ens.value, ens.base_prediction, ens.shrinkage, 500), args.repeat)
        t_cd, beta = best_of(lambda: path(be), args.repeat)
        results[name] = (ens, pred, beta)
        for task, t in ((f"gbt fit, 500 trees, n={args.n}", t_fit), ("gbt predict, 500 trees", t_pred),
                        ("elastic-net path, 20 lambdas", t_cd)):
            print(f"{task:32} {name:>9} {t:10.4f}")

    if len(results) == 2:
        (ea, pa, ba), (eb, pb, bb) = results["compiled"], results["python"]
        same = (np.array_equal(ea.value, eb.value) and np.array_equal(pa, pb) and np.array_equal(ba, bb))
        print(f"outputs bit-identical: {same}")


if __name__ == "__main__":
    main()
