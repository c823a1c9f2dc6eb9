"""Independent reference computations used only by the tests."""

import math
from fractions import Fraction

import numpy as np


def set_partitions(items):
    """All set partitions of a list, by recursive insertion."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part


def brute_force_cumulant(x, y, i, j):
    """Joint cumulant from raw (uncentered) moments over every set partition."""
    cols = [x] * i + [y] * j
    total = []
    for part in set_partitions(list(range(i + j))):
        h = len(part)
        coef = (-1) ** (h - 1) * math.factorial(h - 1)
        prod = 1.0
        for block in part:
            prod *= np.mean(np.prod([cols[p] for p in block], axis=0))
        total.append(coef * prod)
    return math.fsum(total)


def binomial_sign_p(pos, neg):
    """Two-sided sign-test p-value by enumerating the Binomial(n, 1/2) pmf."""
    n = pos + neg
    pmf = [Fraction(math.comb(n, k), 2**n) for k in range(n + 1)]
    k = min(pos, neg)
    return float(min(Fraction(1), 2 * sum(pmf[: k + 1])))


def mixing_terms(model):
    """Hand-written mixing matrix, independent of ``to_mixing``."""
    l1, l2, eta = model.lambda1, model.lambda2, model.eta
    s = model.structure.value
    if s == "x-to-y":
        return (l1, 1.0, 0.0), (l1 * eta + l2, eta, 1.0)
    if s == "y-to-x":
        return (l1 + eta * l2, 1.0, eta), (l2, 0.0, 1.0)
    return (l1, 1.0, 0.0), (l2, 0.0, 1.0)
