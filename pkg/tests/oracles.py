"""Independent reference computations used by the tests.

Nothing here imports the code under test; everything works directly on
Python sets, Fractions and itertools.
"""

import itertools
import math
from fractions import Fraction


def shared_dim(a: frozenset, b: frozenset) -> int:
    return len(a & b) - 1


def eccentricity(a: frozenset, b: frozenset):
    """Exact directed eccentricity of a relative to b, or None when disjoint."""
    q = shared_dim(a, b)
    if q < 0:
        return None
    return Fraction(len(a) - 1 - q, q + 1)


def components(sets: list, q: int) -> list:
    """q-connected classes by Warshall transitive closure on the q-near relation."""
    elig = [i for i, s in enumerate(sets) if len(s) - 1 >= q]
    reach = {i: {j for j in elig if shared_dim(sets[i], sets[j]) >= q} for i in elig}
    for k in elig:
        for i in elig:
            if k in reach[i]:
                reach[i] |= reach[k]
    classes = {frozenset(reach[i]) for i in elig}
    return sorted((sorted(c) for c in classes), key=lambda c: c[0])


def structure(sets: list) -> list:
    top = max(len(s) for s in sets) - 1
    return [len(components(sets, q)) for q in range(top, -1, -1)]


def cycle_length(cost, order) -> float:
    n = len(order)
    return math.fsum(cost[order[k]][order[(k + 1) % n]] for k in range(n))


def tsp_optimum(cost) -> float:
    """Optimum over every permutation, no symmetry reduction."""
    n = len(cost)
    return min(cycle_length(cost, p) for p in itertools.permutations(range(n)))


def sign_test_p(diffs) -> float:
    """Two-sided exact sign test by summing binomial tail probabilities."""
    nz = [d for d in diffs if d != 0]
    n = len(nz)
    if n == 0:
        return 1.0
    k = sum(d < 0 for d in nz)
    lo = min(k, n - k)
    tail = Fraction(sum(math.comb(n, i) for i in range(lo + 1)), 2 ** n)
    return float(min(Fraction(1), 2 * tail))
