"""Brute-force reference implementations built straight from definitions.

Nothing here imports the package's algorithms; graphs are plain boolean
adjacency matrices (``adj[i, j]`` means i -> j).
"""
from __future__ import annotations

import itertools
import math
import re

import numpy as np


def all_graphs(n):
    """Every graph on n nodes as an adjacency matrix (each pair: none, ->, <-, both)."""
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product(range(4), repeat=len(pairs)):
        adj = np.zeros((n, n), dtype=bool)
        for (i, j), s in zip(pairs, states):
            adj[i, j] = s in (1, 3)
            adj[j, i] = s in (2, 3)
        yield adj


def is_acyclic(adj):
    n = adj.shape[0]
    reach = adj.copy()
    for _ in range(n):
        reach = reach | (reach.astype(int) @ adj.astype(int) > 0)
    return not reach.diagonal().any()


def all_dags(n):
    return [a for a in all_graphs(n) if not (a & a.T).any() and is_acyclic(a)]


def random_dag(rng, n, p=0.5):
    order = rng.permutation(n)
    adj = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                adj[order[a], order[b]] = True
    return adj


def shd_matrix(a, b):
    """Edge edit distance with a reversal costing one."""
    diff = np.abs(a.astype(int) - b.astype(int))
    diff = diff + diff.T
    diff[diff > 1] = 1
    return int(diff.sum() // 2)


def descendants(adj, v):
    """Nodes reachable from v by a directed path, v included."""
    seen, stack = {v}, [v]
    while stack:
        u = stack.pop()
        for w in np.flatnonzero(adj[u]):
            if w not in seen:
                seen.add(int(w))
                stack.append(int(w))
    return seen


def simple_paths(adj, i, j):
    """All simple paths between i and j in the skeleton."""
    skel = adj | adj.T
    out = []

    def walk(path):
        u = path[-1]
        if u == j:
            out.append(tuple(path))
            return
        for w in np.flatnonzero(skel[u]):
            w = int(w)
            if w not in path:
                walk(path + [w])

    walk([i])
    return out


def path_is_open(adj, path, z):
    for k in range(1, len(path) - 1):
        a, b, c = path[k - 1], path[k], path[k + 1]
        collider = adj[a, b] and adj[c, b]
        if collider:
            if not (descendants(adj, b) & z):
                return False
        elif b in z:
            return False
    return True


def valid_adjustment(adj, i, j, z):
    """Generalized adjustment criterion for the effect of i on j, by path enumeration."""
    paths = simple_paths(adj, i, j)
    causal = [p for p in paths if all(adj[p[k], p[k + 1]] for k in range(len(p) - 1))]
    on_causal = {w for p in causal for w in p[1:]}
    forbidden = set().union(*(descendants(adj, w) for w in on_causal)) if on_causal else set()
    if z & forbidden:
        return False
    return not any(path_is_open(adj, p, z) for p in paths if p not in causal)


def sid_oracle(pred, truth):
    n = truth.shape[0]
    count = 0
    for i in range(n):
        z = {int(k) for k in np.flatnonzero(pred[:, i])}
        for j in range(n):
            if j == i:
                continue
            if j in z:
                count += j in descendants(truth, i)
            elif not valid_adjustment(truth, i, j, z):
                count += 1
    return count


def decisiveness_recount(adj):
    n = adj.shape[0]
    asym = sym = 0
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j] and adj[j, i]:
                sym += 1
            elif adj[i, j] or adj[j, i]:
                asym += 1
    return 0.0 if asym + sym == 0 else asym / (asym + sym)


def sparsity_formula(adj):
    n = adj.shape[0]
    return 1.0 - adj.sum() / (n * (n - 1))


def closure(n, edges):
    reach = np.zeros((n, n), dtype=bool)
    for a, b in edges:
        reach[a, b] = True
    for _ in range(int(math.log2(max(n, 2))) + 2):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    return reach


def nearest_scan(matrix, query, tol=1e-12):
    """First row whose exactly summed dot product is within ``tol`` of the best."""
    query = np.asarray(query, dtype=np.float64)
    scores = [math.fsum(np.asarray(row, dtype=np.float64) * query) for row in matrix]
    top = max(scores)
    best = next(k for k, s in enumerate(scores) if s >= top - tol)
    return best, scores[best]


def brute_joint(endo, exo, funcs, order):
    """Joint over ``endo`` by looping over exogenous values with the raw callables."""
    table = {}
    names = list(exo)
    for combo in itertools.product(*(list(exo[e].items()) for e in names)):
        values = {e: v for e, (v, _) in zip(names, combo)}
        p = math.prod(q for _, q in combo)
        for v in order:
            parents, fn = funcs[v]
            values[v] = fn(*(values[x] for x in parents))
        key = tuple(values[v] for v in endo)
        table[key] = table.get(key, 0.0) + p
    return table


def chain_gold_from_text(text):
    """Answer a chain question by reading its premises and closing them transitively."""
    body, question = text.rsplit("Does ", 1)
    asked = re.fullmatch(r"(.+) cause (.+)\?", question.strip())
    edges = re.findall(r"(\w+) causes (\w+)", body)
    reach = {asked.group(1)}
    frontier = [asked.group(1)]
    while frontier:
        node = frontier.pop()
        for a, b in edges:
            if a == node and b not in reach:
                reach.add(b)
                frontier.append(b)
    return asked.group(2) in reach
