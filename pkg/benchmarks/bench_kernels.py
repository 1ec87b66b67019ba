"""Time the three kernels on the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row is the best of ``--repeat`` runs, after one untimed warm-up call
(so numba compilation is excluded).
"""
import argparse
import itertools
import timeit

import numpy as np

from causalprobe import _accel
from causalprobe.facts import EmbeddingRecord, Polarity, VectorStore, nearest
from causalprobe.metrics import sid_directed
from causalprobe.scm import make_scm, joint_distribution


def random_dag(rng, n, p=0.4):
    order = rng.permutation(n)
    adj = np.zeros((n, n), dtype=bool)
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < p:
            adj[order[a], order[b]] = True
    return adj


def sid_case(rng):
    pairs = [(random_dag(rng, 8), random_dag(rng, 8)) for _ in range(20)]
    return lambda backend: [sid_directed(a, b, backend) for a, b in pairs]


def joint_case(rng, n=10):
    names = [f"X{k}" for k in range(n)]
    exo, funcs = {}, {}
    for k, v in enumerate(names):
        parents = tuple(names[j] for j in range(max(0, k - 2), k))
        w = rng.dirichlet(np.ones(3))
        exo[f"U{k}"] = {0: w[0], 1: w[1], 2: 1.0 - w[0] - w[1]}
        table = {key: int(rng.integers(2))
                 for key in itertools.product(*([(0, 1)] * len(parents)), range(3))}
        funcs[v] = (parents + (f"U{k}",), lambda *a, t=table: t[a])
    scm = make_scm({v: (0, 1) for v in names}, exo, funcs)
    return lambda backend: joint_distribution(scm, backend=backend)


def cosine_case(rng, rows=20000, dim=256):
    vecs = rng.standard_normal((rows, dim)).astype(np.float32)
    recs = [EmbeddingRecord(k, 4, Polarity.CAUSAL, str(k)) for k in range(rows)]
    store = VectorStore("bench", recs, vecs)
    queries = rng.standard_normal((50, dim))
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)
    return lambda backend: [nearest(store, q, backend) for q in queries]


CASES = {
    "dconnected (SID, 20 pairs of 8-node DAGs)": sid_case,
    "enumerate_joint (10 variables, 3^10 noise states)": joint_case,
    "cosine_argmax (50 queries, 20000 x 256 store)": cosine_case,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    backends = [_accel.get_backend(b) for b in _accel.available_backends()]
    print(f"{'kernel':52}" + "".join(f"{b.name:>12}" for b in backends))
    for label, make in CASES.items():
        run = make(np.random.default_rng(args.seed))
        cells = []
        for backend in backends:
            run(backend)
            best = min(timeit.repeat(lambda: run(backend), number=1, repeat=args.repeat))
            cells.append(f"{1000 * best:10.1f}ms")
        print(f"{label:52}" + "".join(f"{c:>12}" for c in cells))


if __name__ == "__main__":
    main()
