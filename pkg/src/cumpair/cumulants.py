"""Plug-in estimates of joint moments and joint cumulants of a pair (X, Y).

Cumulants are evaluated from central moments, so every partition block of
size one vanishes and only the blocks of size >= 2 contribute:

    C_{i,j} = m_{i,j}                                   (i + j = 2, 3)
    C_{i,j} = m_4 - sum over the 3 pairings m(pair) m(pair)
    C_{i,j} = m_5 - sum over the 10 pair/triple splits m(pair) m(triple)

All moments use the divide-by-n convention.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from cumpair.errors import EmptySample, MissingCumulant, NonFiniteInput, OrderOutOfRange

MAX_ORDER = 5
# Chunk length for partial sums; partials are combined with math.fsum.
CHUNK = 1 << 16

Key = tuple[int, int]


@dataclass(frozen=True)
class PairedSample:
    """``n`` paired observations of two variables.

    The arrays are stored as read-only float64 copies.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64).ravel()
        y = np.array(self.y, dtype=np.float64).ravel()
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in length: {x.size} != {y.size}")
        if x.size < 2:
            raise EmptySample(f"need at least 2 observations, got {x.size}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise NonFiniteInput("sample contains NaN or infinite values")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    def swapped(self) -> PairedSample:
        """Return the sample with the roles of X and Y exchanged."""
        return PairedSample(self.y, self.x)

    def take(self, idx: np.ndarray) -> PairedSample:
        return PairedSample(self.x[idx], self.y[idx])


@dataclass(frozen=True)
class MomentTable:
    """Sample means plus central moments E[(X - mu_X)^a (Y - mu_Y)^b]."""

    mean_x: float
    mean_y: float
    max_order: int
    central_moments: dict[Key, float] = field(repr=False)

    def __getitem__(self, key: Key) -> float:
        a, b = key
        if a + b == 0:
            return 1.0
        if a + b == 1:
            return 0.0
        try:
            return self.central_moments[(a, b)]
        except KeyError:
            raise OrderOutOfRange(
                f"moment {key} exceeds table order {self.max_order}"
            ) from None


class CumulantProfile(Mapping):
    """Read-only mapping from ``(i, j)`` to the estimate of C_{i,j}(X, Y)."""

    def __init__(self, values: Mapping[Key, float] | None = None):
        self.values: dict[Key, float] = {
            (int(i), int(j)): float(v) for (i, j), v in dict(values or {}).items()
        }

    def __getitem__(self, key: Key) -> float:
        try:
            return self.values[tuple(key)]
        except KeyError:
            raise MissingCumulant(f"cumulant C_{key} not in profile") from None

    def __iter__(self) -> Iterator[Key]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self):
        inner = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self.values.items()))
        return f"CumulantProfile({{{inner}}})"


def _compensated_mean(rows: np.ndarray) -> np.ndarray:
    """Row means of a 2-D array: pairwise sums per chunk, fsum across chunks."""
    n = rows.shape[1]
    partials = [rows[:, s:s + CHUNK].sum(axis=1) for s in range(0, n, CHUNK)]
    if len(partials) == 1:
        return partials[0] / n
    stacked = np.stack(partials, axis=1)
    return np.array([math.fsum(r) for r in stacked]) / n


def _check_finite(sample: PairedSample) -> None:
    # PairedSample validates on construction; arrays may still be swapped in by callers.
    if not (np.isfinite(sample.x).all() and np.isfinite(sample.y).all()):
        raise NonFiniteInput("sample contains NaN or infinite values")


def center(sample: PairedSample) -> PairedSample:
    """Subtract the sample mean of each column."""
    _check_finite(sample)
    if sample.n < 2:
        raise EmptySample(f"need at least 2 observations, got {sample.n}")
    mx, my = _compensated_mean(np.vstack([sample.x, sample.y]))
    return PairedSample(sample.x - mx, sample.y - my)


def _moment_keys(max_order: int) -> list[Key]:
    return [(a, k - a) for k in range(2, max_order + 1) for a in range(k, -1, -1)]


def moment_table(sample: PairedSample, max_order: int = MAX_ORDER) -> MomentTable:
    """Central moments of every order from 2 through ``max_order``."""
    if not 2 <= max_order <= MAX_ORDER:
        raise OrderOutOfRange(f"max_order must be in [2, {MAX_ORDER}], got {max_order}")
    _check_finite(sample)
    mx, my = _compensated_mean(np.vstack([sample.x, sample.y]))
    xc = sample.x - mx
    yc = sample.y - my

    xp = [np.ones_like(xc), xc]
    yp = [np.ones_like(yc), yc]
    for _ in range(2, max_order + 1):
        xp.append(xp[-1] * xc)
        yp.append(yp[-1] * yc)

    keys = _moment_keys(max_order)
    products = np.empty((len(keys), sample.n))
    for row, (a, b) in enumerate(keys):
        np.multiply(xp[a], yp[b], out=products[row])
    means = _compensated_mean(products)
    moments = {k: float(v) for k, v in zip(keys, means)}
    return MomentTable(float(mx), float(my), max_order, moments)


@lru_cache(maxsize=None)
def _blocks_without_singletons(k: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Partitions of range(k) into two blocks of size >= 2 (only k = 4, 5 needed)."""
    out = []
    if k == 4:
        out = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    elif k == 5:
        for pair in itertools.combinations(range(5), 2):
            rest = tuple(p for p in range(5) if p not in pair)
            out.append((pair, rest))
    return tuple(out)


def _check_key(key: Key, max_order: int = MAX_ORDER) -> Key:
    i, j = key
    if int(i) != i or int(j) != j or i < 0 or j < 0:
        raise OrderOutOfRange(f"cumulant key must be non-negative integers, got {key}")
    i, j = int(i), int(j)
    if not 2 <= i + j <= max_order:
        raise OrderOutOfRange(f"order of {key} must lie in [2, {max_order}]")
    return i, j


def joint_cumulant(table: MomentTable, key: Key) -> float:
    """C_{i,j}(X, Y): X repeated ``i`` times and Y repeated ``j`` times."""
    i, j = _check_key(key, table.max_order)
    k = i + j
    full = table[(i, j)]
    if k <= 3:
        return full

    # Positions 0..i-1 carry X, positions i..k-1 carry Y.
    def block_moment(block):
        a = sum(1 for p in block if p < i)
        return table[(a, len(block) - a)]

    terms = [full]
    for b1, b2 in _blocks_without_singletons(k):
        terms.append(-(block_moment(b1) * block_moment(b2)))
    # fsum is correctly rounded, so the result does not depend on term order.
    return math.fsum(terms)


def cumulant_profile(sample: PairedSample, keys: Iterable[Key]) -> CumulantProfile:
    """Estimate every requested joint cumulant from one moment table."""
    keys = [_check_key(k) for k in keys]
    if not keys:
        return CumulantProfile()
    order = max(2, max(i + j for i, j in keys))
    table = moment_table(sample, order)
    return CumulantProfile({k: joint_cumulant(table, k) for k in keys})
