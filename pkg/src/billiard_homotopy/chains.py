"""Scatterer chains realising group words at zero scatterer radius.

A chain is the ordered list of scatterer core segments an arc-length
minimising trajectory must touch.  Within cell (i, j, k) the cores are

* four family-1 edges  E(i, Y, Z), Y in {j, j+1}, Z in {k, k+1}, points (i+u, Y, Z)
* two family-2 lines   M(X, j, k), X in {i, i+1},              points (X, j+u, k+1/2)

Admissibility rules enforced by the builder:

* families alternate along the chain (so consecutive cores never share a
  face of the cell and their convex hull meets the open cell);
* a family-1 contact has its two neighbours on opposite x1-faces and a
  family-2 contact has its neighbours on opposite x2-faces, so the tension
  from both sides pulls the contact toward opposite ends and the optimum
  stays interior;
* a b/c crossing through a family-2 core has both neighbours below the core
  (b) or both above it (c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .group import check_word, is_reduced

MAX_MIDS = 7
BC_BOUND = math.sqrt(6) + 2 * math.sqrt(3)

STEP = {
    "a": (0, 1, 0), "A": (0, -1, 0),
    "b": (1, 0, 0), "B": (-1, 0, 0),
    "c": (1, 0, 0), "C": (-1, 0, 0),
    "d": (0, 0, 1), "D": (0, 0, -1),
}


class InadmissibleError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CoreSegment:
    """Unit core segment: family 1 spans x1 in [i, i+1] on line (x2, x3) = (y, z);
    family 2 spans x2 in [j, j+1] on line (x1, x3) = (x, z + 1/2)."""

    family: int
    a: int      # i (family 1) or x (family 2)
    b: int      # y (family 1) or j (family 2)
    z: int

    @property
    def x_face(self) -> int:
        return self.a

    @property
    def y_face(self) -> int:
        return self.b

    def point(self, u: float) -> np.ndarray:
        if self.family == 1:
            return np.array([self.a + u, self.b, self.z], dtype=float)
        return np.array([self.a, self.b + u, self.z + 0.5], dtype=float)

    @property
    def origin(self) -> np.ndarray:
        return self.point(0.0)

    @property
    def direction(self) -> np.ndarray:
        return np.array([1.0, 0.0, 0.0]) if self.family == 1 else np.array([0.0, 1.0, 0.0])

    @property
    def midpoint(self) -> np.ndarray:
        return self.point(0.5)

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point(0.0), self.point(1.0)

    def shifted(self, v) -> "CoreSegment":
        dx, dy, dz = (int(c) for c in v)
        if self.family == 1:
            return CoreSegment(1, self.a + dx, self.b + dy, self.z + dz)
        return CoreSegment(2, self.a + dx, self.b + dy, self.z + dz)

    def describe(self) -> str:
        if self.family == 1:
            return f"[{self.a},{self.a + 1}]x{{{self.b}}}x{{{self.z}}}"
        return f"{{{self.a}}}x[{self.b},{self.b + 1}]x{{{self.z + 0.5}}}"


def cell_segments(cell) -> list[CoreSegment]:
    i, j, k = cell
    out = [CoreSegment(1, i, y, z) for y in (j, j + 1) for z in (k, k + 1)]
    out += [CoreSegment(2, x, j, k) for x in (i, i + 1)]
    return out


def shift_cell(cell, letter: str):
    s = STEP[letter]
    return (cell[0] + s[0], cell[1] + s[1], cell[2] + s[2])


def crossing_options(cell, letter: str) -> list[tuple[CoreSegment, int | None]]:
    """Cores through which ``letter`` leaves ``cell``, with the required
    neighbour height (x3 of family-1 neighbours) for b/c crossings."""
    i, j, k = cell
    if letter == "a":
        return [(CoreSegment(1, i, j + 1, z), None) for z in (k, k + 1)]
    if letter == "A":
        return [(CoreSegment(1, i, j, z), None) for z in (k, k + 1)]
    if letter == "d":
        return [(CoreSegment(1, i, y, k + 1), None) for y in (j, j + 1)]
    if letter == "D":
        return [(CoreSegment(1, i, y, k), None) for y in (j, j + 1)]
    x = i + 1 if letter in "bc" else i
    level = k if letter in "bB" else k + 1
    return [(CoreSegment(2, x, j, k), level)]


def balanced(prev: CoreSegment, s: CoreSegment, nxt: CoreSegment, level: int | None = None) -> bool:
    """Force balance at contact ``s`` between neighbours ``prev`` and ``nxt``."""
    if prev.family == s.family or nxt.family == s.family:
        return False
    if s.family == 1:
        return prev.x_face != nxt.x_face
    if prev.y_face == nxt.y_face:
        return False
    if level is not None and not (prev.z == level and nxt.z == level):
        return False
    return True


@dataclass
class SegmentChain:
    """Cores to touch in order.  ``anchors`` marks fixed-midpoint entries."""

    segments: list[CoreSegment]
    word: str
    cells: list[tuple] = field(default_factory=list)          # cell of leg i (segments i -> i+1)
    crossing_index: list[int] = field(default_factory=list)   # segment index of each crossing
    levels: dict = field(default_factory=dict)                # segment index -> b/c level
    anchored: tuple[bool, bool] = (False, False)
    period: tuple | None = None                               # lattice translation if cyclic

    @property
    def fixed(self) -> list[bool]:
        out = [False] * len(self.segments)
        if self.anchored[0]:
            out[0] = True
        if self.anchored[1]:
            out[-1] = True
        return out

    def mids_per_cell(self) -> list[int]:
        idx = self.crossing_index
        return [b - a - 1 for a, b in zip(idx, idx[1:])]

    def validate(self) -> None:
        segs = self.segments
        n = len(segs)
        for i in range(n - 1):
            if segs[i].family == segs[i + 1].family:
                raise InadmissibleError(f"consecutive cores of one family at {i}")
        rng = range(n) if self.period is not None else range(1, n - 1)
        for i in rng:
            if self.period is not None:
                prev = segs[i - 1] if i > 0 else segs[-1].shifted([-c for c in self.period])
                nxt = segs[i + 1] if i + 1 < n else segs[0].shifted(self.period)
            else:
                prev, nxt = segs[i - 1], segs[i + 1]
            if not balanced(prev, segs[i], nxt, self.levels.get(i)):
                raise InadmissibleError(f"unbalanced contact {i}: {segs[i].describe()}")

    def displacement(self) -> tuple[int, int, int]:
        v = np.zeros(3, dtype=int)
        for ch in self.word:
            v += STEP[ch]
        return tuple(int(x) for x in v)


# --------------------------------------------------------------------------
# In-cell search.

@lru_cache(maxsize=None)
def _cell_paths(cell, prev: CoreSegment, entry: CoreSegment, entry_level, exit_letter: str):
    """Minimal mid sequences in ``cell`` from an entry crossing to an exit crossing.

    Returns {(exit_core, exit_level, last_before_exit): mids} keeping the first
    (fewest mids, then lexicographically least) sequence for each key.
    """
    segs = cell_segments(cell)
    exits = {s: lv for s, lv in crossing_options(cell, exit_letter)}
    found: dict = {}
    frontier = [((), prev, entry, entry_level)]
    for depth in range(MAX_MIDS + 1):
        nxt_frontier = []
        for mids, p, last, lv in frontier:
            for s in segs:
                if s.family == last.family or not balanced(p, last, s, lv):
                    continue
                if s in exits:
                    ex_lv = exits[s]
                    if ex_lv is None or last.z == ex_lv:
                        key = (s, ex_lv, last)
                        if key not in found:
                            found[key] = mids
                if depth < MAX_MIDS:
                    nxt_frontier.append((mids + (s,), last, s, None))
        frontier = nxt_frontier
        if not frontier:
            break
    return found


def _start_states(word: str, cell0):
    """(anchor, first crossing core, level) choices for the first letter."""
    out = []
    for x, lv in crossing_options(cell0, word[0]):
        for s in cell_segments(cell0):
            if s.family == x.family:
                continue
            if lv is not None and s.z != lv:
                continue
            out.append((s, x, lv))
    return out


def _run_dp(word: str, cell0, starts):
    """Layered shortest path over crossing states.

    A state after crossing t is (prev core, crossing core, level) with the
    crossing's next neighbour still open.  Returns per-layer dicts
    state -> (cost, backpointer, mids).
    """
    layers = [{(p, x, lv): (0, None, ()) for p, x, lv in starts}]
    cell = shift_cell(cell0, word[0])
    for t in range(1, len(word)):
        nxt: dict = {}
        for state in sorted(layers[-1], key=lambda s: (layers[-1][s][0], s[0], s[1])):
            cost = layers[-1][state][0]
            p, x, lv = state
            for (ex, ex_lv, last), mids in _cell_paths(cell, p, x, lv, word[t]).items():
                key = (last, ex, ex_lv)
                c = cost + len(mids)
                if key not in nxt or c < nxt[key][0]:
                    nxt[key] = (c, state, mids)
        if not nxt:
            raise InadmissibleError(f"no admissible continuation at turn {word[t - 1]}{word[t]}")
        layers.append(nxt)
        cell = shift_cell(cell, word[t])
    return layers


def _trace_back(layers, end_state):
    states, mids_list = [end_state], []
    for t in range(len(layers) - 1, 0, -1):
        _, back, mids = layers[t][states[-1]]
        mids_list.append(mids)
        states.append(back)
    states.reverse()
    mids_list.reverse()
    return states, mids_list


def _assemble(word, cell0, states, mids_list, head=None, tail=None):
    segs, cells, cross_idx, levels = [], [], [], {}
    cell = cell0
    if head is not None:
        segs.append(head)
    for t, (p, x, lv) in enumerate(states):
        if segs:
            cells.append(cell)
        cross_idx.append(len(segs))
        if lv is not None:
            levels[len(segs)] = lv
        segs.append(x)
        cell = shift_cell(cell, word[t])
        if t < len(mids_list):
            for m in mids_list[t]:
                cells.append(cell)
                segs.append(m)
    if tail is not None:
        cells.append(cell)
        segs.append(tail)
    return segs, cells, cross_idx, levels


def _final_anchor(cell, prev: CoreSegment, x: CoreSegment, lv):
    for s in cell_segments(cell):
        if s.family != x.family and balanced(prev, x, s, lv):
            return s
    return None


def build_chain(w: str, cell0=(0, 0, 0)) -> SegmentChain:
    """Chain for reduced word ``w`` with anchors at both ends.

    The first and last cores are anchor edges whose midpoints stay fixed.
    """
    w = check_word(w)
    if not w:
        raise InadmissibleError("nothing to anchor: empty word")
    if not is_reduced(w):
        raise InadmissibleError(f"word {w!r} is not reduced")
    cell0 = tuple(cell0)
    layers = _run_dp(w, cell0, _start_states(w, cell0))
    cell_end = cell0
    for ch in w:
        cell_end = shift_cell(cell_end, ch)
    best = None
    for state in sorted(layers[-1], key=lambda s: (layers[-1][s][0], s[0], s[1])):
        anchor = _final_anchor(cell_end, *state)
        if anchor is not None:
            best = (state, anchor)
            break
    if best is None:
        raise InadmissibleError("no terminal anchor balances the last crossing")
    states, mids_list = _trace_back(layers, best[0])
    segs, cells, cross_idx, levels = _assemble(w, cell0, states, mids_list,
                                               head=states[0][0], tail=best[1])
    chain = SegmentChain(segs, w, cells, cross_idx, levels, anchored=(True, True))
    chain.validate()
    return chain


def attach_anchors(chain: SegmentChain) -> SegmentChain:
    """Return ``chain`` with fixed-midpoint anchor edges at both ends.

    Chains from :func:`build_chain` already carry them; an unanchored chain
    gets the first balancing edge in its first and last cell.
    """
    if not chain.segments:
        raise InadmissibleError("nothing to anchor")
    if all(chain.anchored):
        return chain
    segs = list(chain.segments)
    first, last = chain.crossing_index[0], chain.crossing_index[-1]
    cell0 = chain.cells[0] if chain.cells else None
    if cell0 is None:
        raise InadmissibleError("chain has no cells to anchor in")
    head = initial_anchor(cell0, segs[first], segs[first + 1], chain.levels.get(first))
    tail = _final_anchor(chain.cells[-1], segs[last - 1], segs[last], chain.levels.get(last))
    if head is None or tail is None:
        raise InadmissibleError("no balancing anchor edge")
    levels = {k + 1: v for k, v in chain.levels.items()}
    out = SegmentChain([head] + segs + [tail], chain.word,
                       [chain.cells[0]] + chain.cells + [chain.cells[-1]],
                       [i + 1 for i in chain.crossing_index], levels, anchored=(True, True))
    out.validate()
    return out


def initial_anchor(cell, first_crossing: CoreSegment, next_core: CoreSegment, level=None):
    """Anchor edge in ``cell`` balancing the force that ``next_core`` exerts on
    the first crossing core.  Candidates are tried family-1 edges first, in
    order (y, z) = (j, k), (j, k+1), (j+1, k), (j+1, k+1), then family-2."""
    for s in cell_segments(cell):
        if s.family != first_crossing.family and balanced(s, first_crossing, next_core, level):
            return s
    return None


# --------------------------------------------------------------------------
# Periodic chains.

def build_periodic_chain(w: str, v, max_power: int = 2) -> SegmentChain:
    """Cyclic chain for the periodic word w^m with translation m v.

    m is the smallest power (up to ``max_power``) for which the alternation
    rules close up consistently.
    """
    w = check_word(w)
    v = tuple(int(c) for c in v)
    if not w:
        raise InadmissibleError("empty word")
    if not is_reduced(w + w[0]):
        raise InadmissibleError("word is not cyclically reduced")
    disp = tuple(int(c) for c in sum(np.array(STEP[ch]) for ch in w))
    if disp != v:
        raise ValueError(f"displacement mismatch: word moves by {disp}, got {v}")
    if v == (0, 0, 0):
        raise ValueError("zero translation cannot close a periodic orbit")
    cell0 = (0, 0, 0)
    for m in range(1, max_power + 1):
        word = w * m
        shift = tuple(m * c for c in v)
        best = None
        for start in _start_states(word, cell0):
            layers = _run_dp(word + word[0], cell0, [start])
            p0, x0, lv0 = start
            target = (p0.shifted(shift), x0.shifted(shift), lv0 + shift[2] if lv0 is not None else None)
            if target in layers[-1]:
                cost = layers[-1][target][0]
                if best is None or cost < best[0]:
                    best = (cost, layers, target)
        if best is None:
            continue
        _, layers, target = best
        states, mids_list = _trace_back(layers, target)
        segs, cells, cross_idx, levels = _assemble(word, cell0, states[:-1], mids_list)
        chain = SegmentChain(segs, word, cells, cross_idx, levels, period=shift)
        # leg from the last core back to the translated first core
        chain.cells.append(shift)
        chain.validate()
        return chain
    raise InadmissibleError(f"no periodic admissible chain for {w!r} up to power {max_power}")


# --------------------------------------------------------------------------
# Idle runs.

def _idle_pattern(p: CoreSegment, q: CoreSegment, cell) -> list[CoreSegment]:
    i, j, k = cell
    other_y = lambda y: 2 * j + 1 - y
    other_x = lambda x: 2 * i + 1 - x
    if p.family == 2:
        return [CoreSegment(1, i, q.y_face, q.z), CoreSegment(2, other_x(p.x_face), j, k),
                CoreSegment(1, i, other_y(q.y_face), q.z), p]
    return [CoreSegment(2, q.x_face, j, k), CoreSegment(1, i, other_y(p.y_face), p.z),
            CoreSegment(2, other_x(q.x_face), j, k), CoreSegment(1, i, p.y_face, p.z)]


def insert_idle_runs(chain: SegmentChain, count: int) -> SegmentChain:
    """Insert ``count`` word-neutral four-contact idle runs, spread round-robin
    over the interior legs of the chain."""
    if count <= 0:
        return chain
    segs, cells = list(chain.segments), list(chain.cells)
    n_legs = len(segs) - 1
    first = chain.crossing_index[0]
    last = chain.crossing_index[-1]
    legs = [i for i in range(first, last)] or list(range(n_legs))
    per_leg = {leg: 0 for leg in legs}
    for r in range(count):
        per_leg[legs[r % len(legs)]] += 1
    new_segs, new_cells, remap = [], [], {}
    for i, s in enumerate(segs):
        remap[i] = len(new_segs)
        new_segs.append(s)
        if i < n_legs:
            cell = cells[i]
            reps = per_leg.get(i, 0)
            for _ in range(reps):
                pattern = _idle_pattern(new_segs[-1], segs[i + 1], cell)
                for ps in pattern:
                    new_cells.append(cell)
                    new_segs.append(ps)
            new_cells.append(cell)
    out = replace(chain, segments=new_segs, cells=new_cells,
                  crossing_index=[remap[i] for i in chain.crossing_index],
                  levels={remap[i]: lv for i, lv in chain.levels.items()})
    out.validate()
    return out
