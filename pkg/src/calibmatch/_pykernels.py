"""Pure-Python matching kernels.

Mirror of ``_ckernels.pyx``; both must return identical edge lists for
identical inputs, including on exact floating-point ties.
"""

from __future__ import annotations

import math

NAME = "python"


def edge_index(n: int, u: int, v: int) -> int:
    # position of (u, v), u < v, in lexicographic order of node pairs
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def _walk(mask: int, choice: list[int], n: int) -> list[int]:
    out = []
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = choice[mask]
        if j < 0:
            mask &= ~(1 << i)
        else:
            out.append(edge_index(n, i, j))
            mask &= ~((1 << i) | (1 << j))
    return out


def max_weight_matching(n: int, weights) -> list[int]:
    """Maximum-weight matching on the complete graph K_n by bitmask DP.

    ``best[mask]`` is the optimum over matchings inside node set ``mask``;
    ties in value go to the lexicographically smallest sorted edge list.
    """
    w = [float(x) for x in weights]
    size = 1 << n
    best = [0.0] * size
    choice = [-1] * size
    for mask in range(1, size):
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        val = best[rest]
        ch = -1
        base = i * (2 * n - i - 1) // 2 - i - 1
        bits = rest
        while bits:
            j = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            cand = w[base + j] + best[rest & ~(1 << j)]
            if cand > val:
                val, ch = cand, j
            elif cand == val:
                choice[mask] = j
                cand_list = _walk(mask, choice, n)
                choice[mask] = ch
                if cand_list < _walk(mask, choice, n):
                    ch = j
        best[mask] = val
        choice[mask] = ch
    return _walk(size - 1, choice, n)


def greedy_matching(n: int, weights, threshold: float = -math.inf) -> list[int]:
    """Heaviest-first greedy over positive edges with weight >= threshold."""
    w = [float(x) for x in weights]
    order = sorted(range(len(w)), key=lambda e: (-w[e], e))
    used = [False] * n
    picked = []
    ends = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for e in order:
        if not (w[e] > 0.0 and w[e] >= threshold):
            break
        u, v = ends[e]
        if not used[u] and not used[v]:
            used[u] = used[v] = True
            picked.append(e)
    return sorted(picked)
