"""numba-compiled kernels; signatures mirror ``_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True)
def enumerate_joint(exo_sizes, exo_probs, exo_offsets, order, par_idx, par_ptr,
                    par_stride, tab, tab_ptr, out_stride, out_size):
    k = exo_sizes.shape[0]
    m = order.shape[0]
    total = 1
    for j in range(k):
        total *= exo_sizes[j]
    joint = np.zeros(out_size, dtype=np.float64)
    vals = np.zeros(k + m, dtype=np.int64)
    for _ in range(total):
        prob = 1.0
        for j in range(k):
            prob *= exo_probs[exo_offsets[j] + vals[j]]
        for t in range(m):
            e = order[t]
            flat = 0
            for p in range(par_ptr[e], par_ptr[e + 1]):
                flat += vals[par_idx[p]] * par_stride[p]
            vals[k + e] = tab[tab_ptr[e] + flat]
        out = 0
        for e in range(m):
            out += vals[k + e] * out_stride[e]
        joint[out] += prob
        # mixed-radix increment, last exogenous variable fastest
        j = k - 1
        while j >= 0:
            vals[j] += 1
            if vals[j] < exo_sizes[j]:
                break
            vals[j] = 0
            j -= 1
    return joint


@njit(cache=True)
def dconnected(adj, source, zmask):
    """Reachability search over (node, direction) states."""
    n = adj.shape[0]
    # ancestors of Z, including Z
    anc = zmask.copy()
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for v in range(n):
        if zmask[v]:
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for u in range(n):
            if adj[u, v] and not anc[u]:
                anc[u] = True
                stack[top] = u
                top += 1

    # direction 0: arrived from a child (moving up); 1: arrived from a parent
    visited = np.zeros((n, 2), dtype=np.bool_)
    reach = np.zeros(n, dtype=np.bool_)
    queue = np.empty(2 * n * n + 2, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = source * 2
    tail += 1
    while head < tail:
        state = queue[head]
        head += 1
        v = state // 2
        d = state % 2
        if visited[v, d]:
            continue
        visited[v, d] = True
        if not zmask[v] and v != source:
            reach[v] = True
        if d == 0 and not zmask[v]:
            for u in range(n):
                if adj[u, v] and not visited[u, 0]:
                    queue[tail] = u * 2
                    tail += 1
                if adj[v, u] and not visited[u, 1]:
                    queue[tail] = u * 2 + 1
                    tail += 1
        elif d == 1:
            if not zmask[v]:
                for u in range(n):
                    if adj[v, u] and not visited[u, 1]:
                        queue[tail] = u * 2 + 1
                        tail += 1
            if anc[v]:
                for u in range(n):
                    if adj[u, v] and not visited[u, 0]:
                        queue[tail] = u * 2
                        tail += 1
    return reach


@njit(cache=True)
def cosine_argmax(matrix, query, tie_tol):
    sims = matrix @ query
    top = sims.max()
    best = -1
    ties = 0
    for i in range(sims.shape[0]):
        if sims[i] >= top - tie_tol:
            if best < 0:
                best = i
            ties += 1
    return best, sims[best], ties
