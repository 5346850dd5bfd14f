"""Brute-force equality oracle for short words, independent of the normal-form engine.

Equalities are proved by explicit derivations (inserting relators and free
cancellation); inequalities by homomorphisms that respect the relators:

* abelianisation  a, b, c, d -> Z^3 with b, c both sent to the second axis
* G -> F(x, y):   a -> 1, b -> x, c -> y x y^-1, d -> y
* G -> F(x, y):   a -> x, d -> y, b, c -> 1

A pair neither proved equal nor separated is reported as inconclusive.
"""
from __future__ import annotations

from itertools import product

RELATORS = ("abAB", "acAC", "dbDC")


def _inv(w: str) -> str:
    return w[::-1].swapcase()


def _reduce(w: str) -> str:
    out = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _relator_family() -> list[str]:
    out = set()
    for r in RELATORS:
        for s in (r, _inv(r)):
            for i in range(len(s)):
                out.add(s[i:] + s[:i])
    return sorted(out)


def is_trivial_by_derivation(w: str, max_len: int = 10, max_nodes: int = 200_000) -> bool:
    """Search for a derivation of the empty word from ``w``."""
    start = _reduce(w)
    if not start:
        return True
    rels = _relator_family()
    seen, frontier = {start}, [start]
    while frontier and len(seen) < max_nodes:
        nxt = []
        for u in frontier:
            for i in range(len(u) + 1):
                for r in rels:
                    v = _reduce(u[:i] + r + u[i:])
                    if not v:
                        return True
                    if len(v) <= max_len and v not in seen:
                        seen.add(v)
                        nxt.append(v)
        frontier = nxt
    return False


def _image(w: str, table: dict) -> str:
    return _reduce("".join(table[ch] for ch in w))


_FREE_1 = {"a": "", "A": "", "b": "x", "B": "X", "c": "yxY", "C": "yXY", "d": "y", "D": "Y"}
_FREE_2 = {"a": "x", "A": "X", "b": "", "B": "", "c": "", "C": "", "d": "y", "D": "Y"}


def _abelian(w: str) -> tuple:
    v = [0, 0, 0]
    axis = {"a": 0, "b": 1, "c": 1, "d": 2}
    for ch in w:
        v[axis[ch.lower()]] += 1 if ch.islower() else -1
    return tuple(v)


def invariants(w: str) -> tuple:
    return _abelian(w), _image(w, _FREE_1), _image(w, _FREE_2)


class InconclusiveError(RuntimeError):
    pass


def reduced_words(n: int, letters: str = "aAbBcCdD"):
    for k in range(n + 1):
        for t in product(letters, repeat=k):
            w = "".join(t)
            if _reduce(w) == w:
                yield w


def ball_counts(radius: int, letters: str = "aAbBcCdD") -> list[int]:
    """Ball sizes |B(0)|, ..., |B(radius)| from explicit equality decisions."""
    classes: list[tuple[str, tuple]] = []     # representative, invariants
    counts = []
    for k in range(radius + 1):
        for w in reduced_words(k, letters):
            if len(w) != k:
                continue
            inv = invariants(w)
            candidates = [rep for rep, rinv in classes if rinv == inv]
            if any(is_trivial_by_derivation(w + _inv(rep)) for rep in candidates):
                continue
            if candidates:
                raise InconclusiveError(f"cannot decide {w!r} vs {candidates[0]!r}")
            classes.append((w, inv))
        counts.append(len(classes))
    return counts
