"""Billiard flow on the unit 3-torus with two families of cylindrical scatterers.

Family 1 tubes run along x1 through (x2, x3) in Z^2.  Family 2 tubes run
along x2 through (x1, x3) in Z x (Z + 1/2).  Everything is computed on the
lift to R^3; face crossings of the unit lattice are recorded as letters:

* x2-planes -> a / A
* x1-planes -> b / B below the family-2 height (x3 mod 1 < 1/2), c / C above
* x3-planes -> d / D

Arithmetic is generic over Python floats and ``mpmath.mpf``; pass
``dps=...`` to :func:`simulate` for a high-precision run.
"""
from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Iterator, Optional

import mpmath

DEFAULT_R0 = 0.05
GRAZING_TOL = 1e-9
DEGENERATE_TOL = 1e-9
AXIS_OF_FAMILY = {1: 0, 2: 1}


class TangencyError(RuntimeError):
    """A grazing collision was met; the caller may perturb the initial state."""


class DegenerateCrossingError(RuntimeError):
    """A face was crossed through a scatterer height or a lattice edge."""


def validate_radius(r0: float) -> float:
    if not 0 < r0 < 0.25:
        raise ValueError("r0 must lie in (0, 1/4) for the tubes to be disjoint")
    return r0


class _Backend:
    def __init__(self, mp: bool):
        self.mp = mp
        self.sqrt = mpmath.sqrt if mp else math.sqrt
        self.eps = mpmath.mpf(10) ** (-(mpmath.mp.dps - 8)) if mp else 1e-12

    def num(self, x):
        return mpmath.mpf(x) if self.mp else float(x)

    def floor(self, x) -> int:
        return int(mpmath.floor(x)) if self.mp else math.floor(x)


def _backend_for(x) -> _Backend:
    return _Backend(isinstance(x, mpmath.mpf))


@dataclass
class PhaseState:
    q: tuple
    v: tuple

    def __post_init__(self):
        self.q = tuple(self.q)
        self.v = tuple(self.v)

    def speed_error(self) -> float:
        return abs(float(sum(x * x for x in self.v)) - 1.0)

    def reversed(self) -> "PhaseState":
        """Same point, velocity negated exactly (mpf negation would otherwise
        round to the ambient precision)."""
        neg = lambda x: mpmath.fneg(x, exact=True) if isinstance(x, mpmath.mpf) else -x
        return PhaseState(self.q, tuple(neg(x) for x in self.v))

    def torus_position(self) -> tuple:
        return tuple(float(x) % 1.0 for x in self.q)


@dataclass
class CollisionEvent:
    t: object
    point: tuple
    normal: tuple
    family: int
    tube: tuple          # (x2, x3) for family 1, (x1, x3 - 1/2) for family 2
    cell: tuple
    grazing: bool = False

    def as_dict(self) -> dict:
        return {
            "t": float(self.t),
            "point": [float(x) for x in self.point],
            "normal": [float(x) for x in self.normal],
            "family": self.family,
            "tube": list(self.tube),
            "cell": list(self.cell),
        }


@dataclass
class Crossing:
    t: object
    axis: int
    sign: int
    point: tuple
    letter: str


@dataclass
class LiftedTrajectory:
    vertices: list
    events: list = field(default_factory=list)
    crossings: list = field(default_factory=list)
    duration: object = 0.0
    r0: float = DEFAULT_R0

    @property
    def word(self) -> str:
        return "".join(c.letter for c in self.crossings)

    @property
    def counts(self) -> dict:
        out = {k: 0 for k in "abcd"}
        for c in self.crossings:
            out[c.letter.lower()] += 1
        return out

    @property
    def final_state(self) -> PhaseState:
        return self._final

    def arc_length(self) -> float:
        total = 0.0
        for p, q in zip(self.vertices, self.vertices[1:]):
            total += math.dist([float(x) for x in p], [float(x) for x in q])
        return total


# --------------------------------------------------------------------------
# Ray / tube intersection via 2D grid traversal.

def _dda_cells(p, u, horizon, be: _Backend) -> Iterator[tuple[int, int, object]]:
    """Unit grid cells met by the 2D ray p + t u, t in [0, horizon], with entry times."""
    i, j = be.floor(p[0]), be.floor(p[1])
    inf = None
    steps, tmax, tdelta = [], [], []
    for k, (pk, uk, ck) in enumerate(zip(p, u, (i, j))):
        if uk > 0:
            steps.append(1)
            tmax.append((ck + 1 - pk) / uk)
            tdelta.append(1 / uk)
        elif uk < 0:
            steps.append(-1)
            tmax.append((ck - pk) / uk)
            tdelta.append(-1 / uk)
        else:
            steps.append(0)
            tmax.append(inf)
            tdelta.append(inf)
    t = be.num(0)
    while t <= horizon:
        yield i, j, t
        if tmax[0] is None and tmax[1] is None:
            return
        if tmax[1] is None or (tmax[0] is not None and tmax[0] < tmax[1]):
            t = tmax[0]
            i += steps[0]
            tmax[0] += tdelta[0]
        else:
            t = tmax[1]
            j += steps[1]
            tmax[1] += tdelta[1]


def _circle_hit(p, u, c, r, be: _Backend):
    """Smallest positive entry time of p + t u into the disc |x - c| <= r."""
    dx, dy = p[0] - c[0], p[1] - c[1]
    A = u[0] * u[0] + u[1] * u[1]
    B = 2 * (u[0] * dx + u[1] * dy)
    C = dx * dx + dy * dy - r * r
    if B >= 0:
        return None
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    t = 2 * C / (-B + be.sqrt(disc))
    if t <= be.eps:
        return None
    return t


def _family_frame(family: int, q, v, be: _Backend):
    half = be.num(0.5)
    if family == 1:
        return (q[1], q[2]), (v[1], v[2])
    return (q[0], q[2] - half), (v[0], v[2])


def _family_hit(family: int, q, v, r0, horizon, be: _Backend):
    p, u = _family_frame(family, q, v, be)
    if u[0] == 0 and u[1] == 0:
        return None
    best = None
    checked = set()
    for i, j, t_enter in _dda_cells(p, u, horizon, be):
        if best is not None and t_enter > best[0]:
            break
        for corner in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)):
            if corner in checked:
                continue
            checked.add(corner)
            t = _circle_hit(p, u, corner, r0, be)
            if t is not None and t <= horizon and (best is None or t < best[0]):
                best = (t, corner)
    return best


def _event_from_hit(family: int, t, corner, q, v, r0, be: _Backend) -> CollisionEvent:
    point = tuple(q[k] + t * v[k] for k in range(3))
    half = be.num(0.5)
    if family == 1:
        n = (be.num(0), (point[1] - corner[0]) / r0, (point[2] - corner[1]) / r0)
    else:
        n = ((point[0] - corner[0]) / r0, be.num(0), (point[2] - corner[1] - half) / r0)
    norm = be.sqrt(sum(x * x for x in n))
    n = tuple(x / norm for x in n)
    vn = sum(a * b for a, b in zip(v, n))
    cell = tuple(be.floor(x) for x in point)
    return CollisionEvent(t, point, n, family, tuple(corner), cell, grazing=abs(vn) < GRAZING_TOL)


def nearest_collision(state: PhaseState, r0: float, horizon) -> Optional[CollisionEvent]:
    """Earliest collision of the ray from ``state`` with any tube within ``horizon``."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    be = _backend_for(state.q[0])
    r0 = be.num(r0)
    best = None
    for family in (1, 2):
        hit = _family_hit(family, state.q, state.v, r0, horizon, be)
        if hit is not None and (best is None or hit[0] < best[1][0]):
            best = (family, hit)
    if best is None:
        return None
    family, (t, corner) = best
    return _event_from_hit(family, t, corner, state.q, state.v, r0, be)


def reflect(v, n):
    """Specular reflection v - 2 (v.n) n; requires an incoming velocity (v.n < 0)."""
    vn = sum(a * b for a, b in zip(v, n))
    if vn >= 0:
        raise ValueError("reflect requires v.n < 0 (incoming velocity)")
    # dividing by n.n keeps |v| exact to first order in the normal's rounding
    k = 2 * vn / sum(b * b for b in n)
    return tuple(a - k * b for a, b in zip(v, n))


# --------------------------------------------------------------------------
# Face crossings.

def letter_for(axis: int, sign: int, height) -> str:
    if axis == 1:
        base = "a"
    elif axis == 2:
        base = "d"
    else:
        base = "b" if (float(height) % 1.0) < 0.5 else "c"
    return base if sign > 0 else base.upper()


def segment_crossings(p, q, t0=0.0, be: _Backend | None = None) -> list[Crossing]:
    """Lattice-face crossings of the straight segment p -> q in time order.

    Raises DegenerateCrossingError for a crossing of an x1-face within 1e-9
    of the family-2 height or of a lattice edge, or for simultaneous crossings.
    """
    be = be or _backend_for(p[0])
    d = [q[k] - p[k] for k in range(3)]
    length = be.sqrt(sum(x * x for x in d))
    if length == 0:
        return []
    events = []
    for axis in range(3):
        if d[axis] == 0:
            continue
        sign = 1 if d[axis] > 0 else -1
        # a point on a face belongs to the cell above it, so the planes crossed
        # are exactly those between the endpoints' cell indices
        fp, fq = be.floor(p[axis]), be.floor(q[axis])
        planes = range(fp + 1, fq + 1) if sign > 0 else range(fp, fq, -1)
        for n in planes:
            s = min(max((n - p[axis]) / d[axis], be.num(0)), be.num(1))
            events.append((s, axis, sign))
    events.sort()
    for (s1, *_), (s2, *_) in zip(events, events[1:]):
        if float(s2 - s1) * float(length) < DEGENERATE_TOL:
            raise DegenerateCrossingError("simultaneous face crossings (lattice edge)")
    out = []
    for s, axis, sign in events:
        point = tuple(p[k] + s * d[k] for k in range(3))
        if axis == 0:
            frac = float(point[2]) % 1.0
            if min(abs(frac - 0.5), frac, 1 - frac) < DEGENERATE_TOL:
                raise DegenerateCrossingError(f"x1-face crossed at height {float(point[2])}")
        out.append(Crossing(t0 + s * length, axis, sign, point, letter_for(axis, sign, point[2])))
    return out


def face_crossings(tr: LiftedTrajectory) -> tuple[str, dict]:
    return tr.word, tr.counts


def polyline_crossings(vertices) -> list[Crossing]:
    out, t = [], 0.0
    be = _backend_for(vertices[0][0])
    for p, q in zip(vertices, vertices[1:]):
        out.extend(segment_crossings(p, q, t, be))
        t = t + be.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))
    return out


# --------------------------------------------------------------------------
# Flow.

def distance_to_tubes(q, r0: float = 0.0) -> float:
    """Distance from q to the nearest tube core (minus r0)."""
    x1, x2, x3 = (float(c) for c in q)
    d1 = math.hypot(x2 - round(x2), x3 - round(x3))
    d2 = math.hypot(x1 - round(x1), (x3 - 0.5) - round(x3 - 0.5))
    return min(d1, d2) - r0


def simulate(s0: PhaseState, r0: float, T, dps: int | None = None,
             record_crossings: bool = True, renormalize: bool = True,
             max_events: int | None = None) -> LiftedTrajectory:
    """Run the billiard flow from ``s0`` for time ``T`` (or until ``max_events`` collisions).

    With ``dps`` the whole run is carried out in mpmath at that many digits.
    ``renormalize=False`` keeps the raw reflected velocity, for drift checks.
    """
    validate_radius(r0)
    if T <= 0:
        raise ValueError("T must be positive")
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        be = _Backend(dps is not None)
        q = tuple(be.num(x) for x in s0.q)
        v = tuple(be.num(x) for x in s0.v)
        norm = be.sqrt(sum(x * x for x in v))
        v = tuple(x / norm for x in v)
        T = be.num(T)
        if distance_to_tubes(q, r0) < -1e-12:
            raise ValueError("initial position lies inside a scatterer")
        tr = LiftedTrajectory([q], r0=r0)
        t = be.num(0)
        while t < T:
            ev = nearest_collision(PhaseState(q, v), r0, T - t)
            if ev is None:
                q_next = tuple(q[k] + (T - t) * v[k] for k in range(3))
                dt = T - t
            else:
                if ev.grazing:
                    raise TangencyError(f"grazing collision at t={float(t + ev.t):.6g}")
                q_next = ev.point
                dt = ev.t
            if record_crossings:
                tr.crossings.extend(segment_crossings(q, q_next, t, be))
            t = t + dt
            q = q_next
            tr.vertices.append(q)
            if ev is not None:
                ev.t = t
                tr.events.append(ev)
                v = reflect(v, ev.normal)
                if renormalize:
                    norm = be.sqrt(sum(x * x for x in v))
                    v = tuple(x / norm for x in v)
                if max_events is not None and len(tr.events) >= max_events:
                    break
        tr.duration = t
        tr._final = PhaseState(q, v)
    return tr


def random_state(rng, r0: float, margin: float = 1e-3) -> PhaseState:
    """Uniform position in the unit cell outside the tubes, uniform direction."""
    while True:
        q = tuple(float(x) for x in rng.random(3))
        if distance_to_tubes(q, r0) > margin:
            break
    v = rng.normal(size=3)
    v = v / math.sqrt(float(v @ v))
    return PhaseState(q, tuple(float(x) for x in v))
