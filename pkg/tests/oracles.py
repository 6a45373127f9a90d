"""Brute-force references, deliberately independent of the library solvers."""

import itertools
import math


def edges_of(n):
    return list(itertools.combinations(range(n), 2))


def all_matchings(n):
    """Every matching of K_n as a sorted tuple of canonical edge indices."""
    edges = edges_of(n)
    out = []

    def rec(start, used, chosen):
        out.append(tuple(chosen))
        for e in range(start, len(edges)):
            u, v = edges[e]
            if u not in used and v not in used:
                rec(e + 1, used | {u, v}, chosen + [e])

    rec(0, frozenset(), [])
    return out


def brute_force_matching(n, weights):
    """Max fsum value; ties to the lexicographically smallest index list."""
    best = None
    for mt in all_matchings(n):
        val = math.fsum(weights[e] for e in mt)
        if best is None or val > best[0] or (val == best[0] and list(mt) < list(best[1])):
            best = (val, mt)
    return best[1], best[0]


def brute_force_best_subset(ground, weights, independent):
    best = None
    for size in range(ground + 1):
        for s in itertools.combinations(range(ground), size):
            if independent(s):
                val = math.fsum(weights[i] for i in s)
                if best is None or val > best[0]:
                    best = (val, s)
    return best
