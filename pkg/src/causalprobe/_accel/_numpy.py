"""Pure-numpy implementations of the hot kernels.

These are the reference path when numba is unavailable or disabled, and the
d-separation routine here deliberately uses a different algorithm (moralized
ancestral graph) from the compiled one (reachability search) so the two can
cross-check each other.
"""
import numpy as np

_CHUNK = 1 << 18


def enumerate_joint(exo_sizes, exo_probs, exo_offsets, order, par_idx, par_ptr,
                    par_stride, tab, tab_ptr, out_stride, out_size):
    k = exo_sizes.shape[0]
    m = order.shape[0]
    total = int(np.prod(exo_sizes)) if k else 1
    radix = np.ones(k, dtype=np.int64)
    for j in range(k - 2, -1, -1):
        radix[j] = radix[j + 1] * exo_sizes[j + 1]
    joint = np.zeros(out_size, dtype=np.float64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        vals = np.empty((k + m, idx.shape[0]), dtype=np.int64)
        prob = np.ones(idx.shape[0], dtype=np.float64)
        for j in range(k):
            vals[j] = (idx // radix[j]) % exo_sizes[j]
            prob *= exo_probs[exo_offsets[j] + vals[j]]
        for e in order:
            flat = np.zeros(idx.shape[0], dtype=np.int64)
            for p in range(par_ptr[e], par_ptr[e + 1]):
                flat += vals[par_idx[p]] * par_stride[p]
            vals[k + e] = tab[tab_ptr[e] + flat]
        out = np.zeros(idx.shape[0], dtype=np.int64)
        for e in range(m):
            out += vals[k + e] * out_stride[e]
        joint += np.bincount(out, weights=prob, minlength=out_size)
    return joint


def _ancestral_closure(adj, seed):
    """Boolean mask of ``seed`` together with all its ancestors."""
    mask = seed.copy()
    while True:
        grown = mask | (adj[:, mask].any(axis=1))
        if (grown == mask).all():
            return mask
        mask = grown


def dconnected(adj, source, zmask):
    """Mask of nodes d-connected to ``source`` given ``zmask``.

    For each candidate target the moral graph of the ancestral set of
    {source, target} plus Z is built, Z is removed, and undirected
    connectivity is tested by iterated boolean products.
    """
    n = adj.shape[0]
    result = np.zeros(n, dtype=np.bool_)
    adj = adj.astype(np.bool_)
    for target in range(n):
        if target == source or zmask[target]:
            continue
        seed = zmask.copy()
        seed[source] = True
        seed[target] = True
        anc = _ancestral_closure(adj, seed)
        sub = adj & anc[:, None] & anc[None, :]
        moral = sub | sub.T
        # marry co-parents
        for child in np.flatnonzero(anc):
            pa = np.flatnonzero(sub[:, child])
            if pa.size > 1:
                moral[np.ix_(pa, pa)] = True
        np.fill_diagonal(moral, False)
        keep = anc & ~zmask
        moral &= keep[:, None] & keep[None, :]
        frontier = np.zeros(n, dtype=np.bool_)
        frontier[source] = True
        seen = frontier.copy()
        while frontier.any():
            nxt = moral[frontier].any(axis=0) & ~seen
            seen |= nxt
            frontier = nxt
        result[target] = seen[target]
    return result


def cosine_argmax(matrix, query, tie_tol):
    sims = matrix @ query
    close = sims >= sims.max() - tie_tol
    best = int(np.argmax(close))
    return best, float(sims[best]), int(np.count_nonzero(close))
