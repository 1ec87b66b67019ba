"""Random model generators shared by the property and acceptance tests."""
import itertools

import numpy as np

from causalprobe.scm import make_scm


def random_markovian(rng, n):
    """Binary Markovian model: each X_k has its own 3-valued noise and random parents."""
    names = [f"X{k}" for k in range(n)]
    exo = {}
    funcs = {}
    for k, v in enumerate(names):
        parents = [names[j] for j in range(k) if rng.random() < 0.5]
        w = rng.dirichlet(np.ones(3)) * 0.9 + 0.1 / 3
        exo[f"U{k}"] = {0: w[0], 1: w[1], 2: 1.0 - w[0] - w[1]}
        table = {}
        for pa in itertools.product((0, 1), repeat=len(parents)):
            outs = [int(rng.integers(2)) for _ in range(3)]
            if len(set(outs)) == 1:
                outs[int(rng.integers(3))] ^= 1
            for u in range(3):
                table[pa + (u,)] = outs[u]
        funcs[v] = (tuple(parents) + (f"U{k}",), lambda *a, t=table: t[a])
    scm = make_scm({v: (0, 1) for v in names}, exo, funcs)
    return scm, exo, funcs, names
