"""Desk-scale entropy estimates from counts of homotopically distinct trajectories.

n_T counts group elements whose constructed trajectory has length <= T.  Each
element is represented by its shortlex geodesic word and realised by the
minimised anchored chain, so n_T is a lower bound for the true count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chains import build_chain
from .group import LETTERS, CayleyBallTable, GrowthReport, enumerate_ball
from .solver import minimize


def entropy_window() -> tuple[float, float]:
    """(log 3 / (sqrt 6 + 2 sqrt 3), sqrt 3 log 7)."""
    lower = math.log(3) / (math.sqrt(6) + 2 * math.sqrt(3))
    upper = math.sqrt(3) * math.log(7)
    return lower, upper


@dataclass
class EntropyRow:
    T: float
    n_T: int
    cap_reached: bool


@dataclass
class EntropyReport:
    T_values: list
    counts: list
    slope: float                  # least-squares slope of log n_T against T (uncapped rows)
    rate: float                   # log n_T / T at the largest T
    word_cap: int
    cap_reached: list
    lower: float = field(default_factory=lambda: entropy_window()[0])
    upper: float = field(default_factory=lambda: entropy_window()[1])
    lower_bound_semantics: bool = True

    def rows(self):
        return [(T, n, self.slope) for T, n in zip(self.T_values, self.counts)]

    def as_dict(self) -> dict:
        return {
            "T": list(self.T_values), "n_T": list(self.counts), "slope": self.slope,
            "rate": self.rate, "word_cap": self.word_cap, "cap_reached": list(self.cap_reached),
            "lower": self.lower, "upper": self.upper, "lower_bound_semantics": True,
        }


@lru_cache(maxsize=8)
def class_lengths(word_cap: int, letters: str = LETTERS) -> tuple[np.ndarray, np.ndarray]:
    """Sorted constructed lengths of all nontrivial elements of word length <= word_cap,
    with the matching word lengths."""
    table: CayleyBallTable = enumerate_ball(word_cap, letters, keep_words=True)
    words = [w for w in table.canonical.values() if w]
    lengths = np.array([minimize(build_chain(w)).length for w in words])
    order = np.argsort(lengths, kind="stable")
    return lengths[order], np.array([len(words[i]) for i in order])


def count_classes(T: float, word_cap: int, letters: str = LETTERS) -> EntropyRow:
    if T <= 0:
        raise ValueError("T must be positive")
    lengths, wlens = class_lengths(word_cap, letters)
    k = int(np.searchsorted(lengths, T, side="right"))
    capped = bool(k and (wlens[:k] == word_cap).any())
    return EntropyRow(float(T), 1 + k, capped)


def estimate(T_values, word_cap: int, letters: str = LETTERS) -> EntropyReport:
    T_values = [float(t) for t in T_values]
    rows = [count_classes(T, word_cap, letters) for T in T_values]
    counts = [r.n_T for r in rows]
    logs = np.log(np.asarray(counts, dtype=float))
    # fit only where the word cap cannot have truncated the count
    fit = [i for i, r in enumerate(rows) if not r.cap_reached]
    if len(fit) < 2:
        fit = list(range(len(rows)))
    xs = np.asarray(T_values)[fit]
    slope = float(np.polyfit(xs, logs[fit], 1)[0]) if len(fit) > 1 else 0.0
    rate = float(logs[-1] / T_values[-1])
    return EntropyReport(T_values, counts, slope, rate, word_cap, [r.cap_reached for r in rows])


@dataclass
class FreeGrowthReport(GrowthReport):
    sphere_counts: list = field(default_factory=list)
    expected: list = field(default_factory=list)

    @property
    def collisions(self) -> int:
        return sum(e - s for s, e in zip(self.sphere_counts, self.expected))


def free_subgroup_growth(radius: int) -> FreeGrowthReport:
    """Sphere counts of the subgroup generated by a and d, using equality in G.

    A free group of rank two has spheres 4 * 3^(n-1); any shortfall would be a
    collision between distinct reduced {a, d}-words.
    """
    if radius > 8:
        raise ValueError("radius must be <= 8")
    table = enumerate_ball(radius, "aAdD")
    spheres = table.sphere_counts
    expected = [1] + [4 * 3 ** (n - 1) for n in range(1, radius + 1)]
    balls = table.ball_counts
    lo = max(1, radius // 2)
    xs = np.arange(lo, radius + 1, dtype=float)
    rate = float(np.polyfit(xs, np.log(balls[lo:]), 1)[0]) if radius >= 2 else math.log(balls[-1])
    rep = FreeGrowthReport(list(range(radius + 1)), balls, rate, sphere_counts=spheres, expected=expected)
    if rep.collisions:
        raise AssertionError(f"{rep.collisions} collisions among reduced {{a,d}}-words")
    return rep

