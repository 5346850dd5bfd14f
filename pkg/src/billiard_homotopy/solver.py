"""Arc-length minimisation over scatterer chains ("rubber band" relaxation).

The length of a polyline through one point per core segment is convex in
the contact parameters.  :func:`minimize` runs cyclic coordinate sweeps, each
step solving the one-dimensional problem in closed form by unfolding the two
neighbours into a common plane, and finishes with a few Newton steps on the
tridiagonal (or cyclic) Hessian so first-order residuals reach ~1e-12.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .chains import STEP, SegmentChain, build_periodic_chain
from .geometry import (
    CollisionEvent,
    LiftedTrajectory,
    PhaseState,
    nearest_collision,
    polyline_crossings,
    reflect,
)

DEFAULT_TOL = 1e-10
BOUNDARY_EPS = 1e-9


class BoundaryContactError(RuntimeError):
    """An optimal contact sits at a segment endpoint (admissibility violated)."""


class ContinuationError(RuntimeError):
    """Inflating the radius pushed a contact off its cylinder patch."""


@dataclass
class PolylineSolution:
    chain: SegmentChain
    params: np.ndarray
    points: np.ndarray
    length: float
    leg_lengths: np.ndarray
    converged: bool
    decrement: float
    history: list = field(default_factory=list)
    residual: float = 0.0
    grazing: bool = False     # straight orbit lying along a core (no reflections)

    @property
    def per_cell_times(self) -> list[float]:
        """Time between consecutive crossings; anchor legs come first and last."""
        idx = self.chain.crossing_index
        legs = self.leg_lengths
        if self.chain.period is not None:
            times = [float(legs[a:b].sum()) for a, b in zip(idx, idx[1:])]
            times.append(float(legs[idx[-1]:].sum() + legs[: idx[0]].sum()))
            return times
        times = [float(legs[: idx[0]].sum())]
        times += [float(legs[a:b].sum()) for a, b in zip(idx, idx[1:])]
        times.append(float(legs[idx[-1]:].sum()))
        return times

    @property
    def crossing_span(self) -> float:
        """Time from the first to the last crossing contact."""
        idx = self.chain.crossing_index
        return float(self.leg_lengths[idx[0]: idx[-1]].sum())

    def as_dict(self) -> dict:
        return {
            "word": self.chain.word,
            "vertices": self.points.tolist(),
            "params": self.params.tolist(),
            "length": self.length,
            "per_cell_times": self.per_cell_times,
            "converged": self.converged,
            "residual": self.residual,
            "segments": [s.describe() for s in self.chain.segments],
        }


class _Geometry:
    def __init__(self, chain: SegmentChain):
        self.chain = chain
        self.origins = np.array([s.origin for s in chain.segments])
        self.dirs = np.array([s.direction for s in chain.segments])
        self.n = len(chain.segments)
        self.periodic = chain.period is not None
        self.shift = np.array(chain.period, dtype=float) if self.periodic else None
        self.free = np.array([not f for f in chain.fixed])

    def points(self, u: np.ndarray) -> np.ndarray:
        return self.origins + u[:, None] * self.dirs

    def path(self, u: np.ndarray) -> np.ndarray:
        pts = self.points(u)
        if self.periodic:
            pts = np.vstack([pts, pts[:1] + self.shift])
        return pts

    def neighbours(self, pts: np.ndarray, i: int):
        if self.periodic:
            a = pts[i - 1] if i > 0 else pts[-1] - self.shift
            b = pts[i + 1] if i + 1 < self.n else pts[0] + self.shift
        else:
            a, b = pts[i - 1], pts[i + 1]
        return a, b

    def length(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        legs = np.linalg.norm(np.diff(self.path(u), axis=0), axis=1)
        return float(legs.sum()), legs


def _line_step(o, e, a, b) -> float:
    """argmin over u of |o + u e - a| + |o + u e - b| (unconstrained)."""
    pa, pb = (a - o) @ e, (b - o) @ e
    ra = np.linalg.norm(a - o - pa * e)
    rb = np.linalg.norm(b - o - pb * e)
    if ra + rb == 0.0:
        return float(pa)
    return float(pa + (pb - pa) * ra / (ra + rb))


def gradient(geo: _Geometry, u: np.ndarray) -> np.ndarray:
    pts = geo.path(u)
    d = np.diff(pts, axis=0)
    r = np.linalg.norm(d, axis=1)
    unit = d / r[:, None]
    g = np.zeros(geo.n)
    # leg k joins contact k to contact k+1 (index n wraps for periodic chains)
    for k in range(len(unit)):
        i, j = k, (k + 1) % geo.n if geo.periodic else k + 1
        g[i] -= unit[k] @ geo.dirs[i]
        if j < geo.n:
            g[j] += unit[k] @ geo.dirs[j]
    g[~geo.free] = 0.0
    return g


def _hessian(geo: _Geometry, u: np.ndarray) -> np.ndarray:
    pts = geo.path(u)
    d = np.diff(pts, axis=0)
    r = np.linalg.norm(d, axis=1)
    H = np.zeros((geo.n, geo.n))
    for k in range(len(d)):
        i = k
        j = (k + 1) % geo.n if geo.periodic else k + 1
        uhat = d[k] / r[k]
        P = (np.eye(3) - np.outer(uhat, uhat)) / r[k]
        ei = geo.dirs[i]
        H[i, i] += ei @ P @ ei
        if j < geo.n:
            ej = geo.dirs[j]
            H[j, j] += ej @ P @ ej
            H[i, j] -= ei @ P @ ej
            H[j, i] -= ei @ P @ ej
    return H


def first_order_residual(sol: PolylineSolution) -> float:
    geo = _Geometry(sol.chain)
    return float(np.abs(gradient(geo, sol.params)).max(initial=0.0))


def minimize(chain: SegmentChain, tol: float = DEFAULT_TOL, init=None, rng=None,
             max_sweeps: int = 20000, polish: bool = True) -> PolylineSolution:
    """Global minimum of the chain length (the objective is convex).

    ``init`` gives starting contact parameters; otherwise midpoints, or
    uniform random ones when ``rng`` is supplied.  Anchored ends stay at 1/2.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    geo = _Geometry(chain)
    if init is not None:
        u = np.array(init, dtype=float)
    elif rng is not None:
        u = rng.random(geo.n)
    else:
        u = np.full(geo.n, 0.5)
    u[~geo.free] = 0.5
    u = np.clip(u, 0.0, 1.0)
    length, _ = geo.length(u)
    history = [length]
    free_idx = np.nonzero(geo.free)[0]
    decrement = math.inf
    sweeps = 0
    while sweeps < max_sweeps:
        pts = geo.points(u)
        for i in free_idx:
            a, b = geo.neighbours(pts, i)
            u[i] = min(1.0, max(0.0, _line_step(geo.origins[i], geo.dirs[i], a, b)))
            pts[i] = geo.origins[i] + u[i] * geo.dirs[i]
        new_length, _ = geo.length(u)
        history.append(new_length)
        decrement = length - new_length
        length = new_length
        sweeps += 1
        if decrement < tol:
            break
    converged = decrement < tol
    if polish and len(free_idx):
        u, length = _newton_polish(geo, u, length, history)
    length, legs = geo.length(u)
    inner = u[free_idx]
    if len(inner) and (inner.min() < BOUNDARY_EPS or inner.max() > 1 - BOUNDARY_EPS):
        bad = free_idx[(inner < BOUNDARY_EPS) | (inner > 1 - BOUNDARY_EPS)]
        raise BoundaryContactError(f"optimal contact at a segment endpoint: indices {bad.tolist()}")
    sol = PolylineSolution(chain, u, geo.path(u), length, legs, converged, float(decrement), history)
    sol.residual = float(np.abs(gradient(geo, u)).max(initial=0.0))
    return sol


def _newton_polish(geo: _Geometry, u, length, history, iters: int = 30):
    free = geo.free
    for _ in range(iters):
        g = gradient(geo, u)
        if np.abs(g).max() < 1e-14:
            break
        H = _hessian(geo, u)[np.ix_(free, free)]
        try:
            step = np.linalg.solve(H, -g[free])
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-8:
            trial = u.copy()
            trial[free] = np.clip(u[free] + t * step, 0.0, 1.0)
            new_length, _ = geo.length(trial)
            if new_length <= length:
                break
            t *= 0.5
        else:
            break
        if new_length == length and np.array_equal(trial, u):
            break
        u, length = trial, new_length
        history.append(length)
    return u, length


def minimize_path(start, segments, end, tol: float = DEFAULT_TOL, max_sweeps: int = 100000):
    """Shortest path start -> segments[0] -> ... -> end through arbitrary segments.

    ``segments`` are (p0, p1) pairs.  Returns (contact points, length).
    """
    start, end = np.asarray(start, float), np.asarray(end, float)
    o = np.array([np.asarray(a, float) for a, _ in segments])
    span = np.array([np.asarray(b, float) for _, b in segments]) - o
    L = np.linalg.norm(span, axis=1)
    e = span / L[:, None]
    u = 0.5 * L
    def path(u):
        return np.vstack([start, o + u[:, None] * e, end])
    length = float(np.linalg.norm(np.diff(path(u), axis=0), axis=1).sum())
    for _ in range(max_sweeps):
        pts = path(u)
        for i in range(len(u)):
            u[i] = min(L[i], max(0.0, _line_step(o[i], e[i], pts[i], pts[i + 2])))
            pts[i + 1] = o[i] + u[i] * e[i]
        new = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        done = length - new < tol
        length = new
        if done:
            break
    return path(u)[1:-1], length


def pinned_length(chain: SegmentChain, params) -> float:
    geo = _Geometry(chain)
    return geo.length(np.asarray(params, dtype=float))[0]


def close_periodic(w: str, v, tol: float = DEFAULT_TOL, max_power: int = 2) -> PolylineSolution:
    """Closed admissible orbit for the cyclic word w with lattice translation v."""
    from .chains import CoreSegment
    v = tuple(int(c) for c in v)
    if w and w[0] in "aAbB" and w == w[0] * len(w):
        # a straight line along a parallel core closes up after one step
        step = STEP[w[0]]
        if v != tuple(len(w) * c for c in step):
            raise ValueError(f"displacement mismatch: word moves by {tuple(len(w) * c for c in step)}, got {v}")
        seg = CoreSegment(1, 0, 0, 0) if w[0] in "bB" else CoreSegment(2, 0, 0, 0)
        chain = SegmentChain([seg], w, [(0, 0, 0)], [0], {}, period=v)
        p = seg.midpoint
        pts = np.vstack([p, p + np.array(v, dtype=float)])
        n = float(len(w))
        return PolylineSolution(chain, np.array([0.5]), pts, n, np.array([n]), True, 0.0,
                                [n], 0.0, grazing=True)
    chain = build_periodic_chain(w, v, max_power=max_power)
    return minimize(chain, tol)


# --------------------------------------------------------------------------
# Inflation to positive radius.

def _frame(seg):
    if seg.family == 1:
        return np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    return np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])


class _Inflated:
    def __init__(self, sol: PolylineSolution):
        self.geo = _Geometry(sol.chain)
        segs = sol.chain.segments
        self.e1 = np.array([_frame(s)[0] for s in segs])
        self.e2 = np.array([_frame(s)[1] for s in segs])
        self.free = np.nonzero(self.geo.free)[0]

    def unpack(self, x):
        u = np.full(self.geo.n, 0.5)
        th = np.zeros(self.geo.n)
        m = len(self.free)
        u[self.free] = x[:m]
        th[self.free] = x[m:]
        return u, th

    def points(self, x, r):
        u, th = self.unpack(x)
        pts = self.geo.origins + u[:, None] * self.geo.dirs
        rr = np.where(self.geo.free, r, 0.0)
        pts = pts + rr[:, None] * (np.cos(th)[:, None] * self.e1 + np.sin(th)[:, None] * self.e2)
        if self.geo.periodic:
            pts = np.vstack([pts, pts[:1] + self.geo.shift])
        return pts

    def normals(self, x):
        _, th = self.unpack(x)
        return np.cos(th)[:, None] * self.e1 + np.sin(th)[:, None] * self.e2

    def objective(self, x, r):
        u, th = self.unpack(x)
        pts = self.points(x, r)
        d = np.diff(pts, axis=0)
        rl = np.linalg.norm(d, axis=1)
        unit = d / rl[:, None]
        n = self.geo.n
        gp = np.zeros((n, 3))
        for k in range(len(d)):
            i = k
            j = (k + 1) % n if self.geo.periodic else k + 1
            gp[i] -= unit[k]
            if j < n:
                gp[j] += unit[k]
        du = (gp * self.geo.dirs).sum(axis=1)
        dnorm = -np.sin(th)[:, None] * self.e1 + np.cos(th)[:, None] * self.e2
        dth = r * (gp * dnorm).sum(axis=1)
        return float(rl.sum()), np.concatenate([du[self.free], dth[self.free]])


def _newton_inflated(infl: _Inflated, x, r, iters: int = 8, h: float = 1e-6):
    """Newton steps with a central-difference Hessian of the exact gradient."""
    f, g = infl.objective(x, r)
    for _ in range(iters):
        if np.abs(g).max() < 1e-13:
            break
        n = len(x)
        H = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            H[:, k] = (infl.objective(x + e, r)[1] - infl.objective(x - e, r)[1]) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-6:
            fn, gn = infl.objective(x + t * step, r)
            if fn <= f + 1e-15 and np.abs(gn).max() < np.abs(g).max():
                break
            t *= 0.5
        else:
            break
        x, f, g = x + t * step, fn, gn
    return x


def _initial_angles(sol: PolylineSolution, infl: _Inflated) -> np.ndarray:
    pts = sol.points
    th = np.zeros(infl.geo.n)
    for i in infl.free:
        a, b = infl.geo.neighbours(pts[: infl.geo.n], i)
        din = (pts[i] - a) / np.linalg.norm(pts[i] - a)
        dout = (b - pts[i]) / np.linalg.norm(b - pts[i])
        nvec = dout - din
        th[i] = math.atan2(nvec @ infl.e2[i], nvec @ infl.e1[i])
    return th


def specular_residuals(pts: np.ndarray, normals: np.ndarray, indices, periodic_shift=None) -> np.ndarray:
    out = []
    n = len(normals)
    for i in indices:
        if periodic_shift is not None:
            a = pts[i - 1] if i > 0 else pts[n - 1] - periodic_shift
            b = pts[i + 1]
        else:
            a, b = pts[i - 1], pts[i + 1]
        din = (pts[i] - a) / np.linalg.norm(pts[i] - a)
        dout = (b - pts[i]) / np.linalg.norm(b - pts[i])
        if din @ normals[i] >= 0:
            out.append(math.inf)
            continue
        out.append(float(np.linalg.norm(np.array(reflect(tuple(din), tuple(normals[i]))) - dout)))
    return np.array(out)


@dataclass
class InflatedSolution:
    solution: PolylineSolution
    r0: float
    points: np.ndarray
    normals: np.ndarray
    params: np.ndarray
    length: float
    max_specular_residual: float
    trajectory: LiftedTrajectory


def inflate(sol: PolylineSolution, r0: float, steps: int = 5, tol: float = 1e-13) -> InflatedSolution:
    """Continue the zero-radius solution to scatterers of radius ``r0``.

    Contacts move on the cylinder surfaces and are re-minimised at each step
    of a radius grid.  The result is checked to reflect specularly at every
    contact (residual < 1e-6) and is returned as a lifted trajectory that
    starts and ends at the midpoints of the anchor legs (for periodic
    solutions: one period starting at the first contact).
    """
    if not 0 <= r0 <= 0.05:
        raise ValueError("inflation radius must lie in [0, 0.05]")
    if sol.grazing:
        return _free_orbit(sol, r0)
    infl = _Inflated(sol)
    x = np.concatenate([sol.params[infl.free], _initial_angles(sol, infl)[infl.free]])
    if r0 > 0:
        for r in np.linspace(0.0, r0, steps + 1)[1:]:
            res = _scipy_minimize(infl.objective, x, args=(r,), jac=True, method="BFGS",
                                  options={"gtol": tol, "maxiter": 20000, "xrtol": 0.0})
            x = _newton_inflated(infl, res.x, r)
            u, _ = infl.unpack(x)
            if u[infl.free].min() <= 0 or u[infl.free].max() >= 1:
                raise ContinuationError(f"contact left its segment at r0={r:.4g}")
            pts = infl.points(x, r)
            resid = specular_residuals(pts, infl.normals(x), infl.free,
                                       infl.geo.shift if infl.geo.periodic else None)
            if not np.all(np.isfinite(resid)):
                raise ContinuationError(f"contact passes through its scatterer at r0={r:.4g}")
    pts = infl.points(x, r0)
    normals = infl.normals(x)
    resid = specular_residuals(pts, normals, infl.free,
                               infl.geo.shift if infl.geo.periodic else None) if r0 > 0 else np.zeros(0)
    max_resid = float(resid.max(initial=0.0))
    if r0 > 0 and max_resid > 1e-6:
        raise ContinuationError(f"specular residual {max_resid:.3g} exceeds 1e-6")
    length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
    traj = _trajectory_from(sol, infl, pts, normals, r0)
    return InflatedSolution(sol, r0, pts, normals, x, length, max_resid, traj)


GRAZING_OFFSET = 0.3


def _free_orbit(sol: PolylineSolution, r0: float) -> InflatedSolution:
    """Move a grazing straight orbit off its core by GRAZING_OFFSET; it then
    meets no scatterer at all."""
    pts = sol.points.copy()
    if r0 > 0:
        c = GRAZING_OFFSET / math.sqrt(2)
        off = np.array([0.0, c, c]) if sol.chain.segments[0].family == 1 else np.array([c, 0.0, -c])
        pts = pts + off
    verts = [tuple(p) for p in pts]
    tr = LiftedTrajectory(verts, [], polyline_crossings(verts), sol.length, r0)
    return InflatedSolution(sol, r0, pts, np.zeros((0, 3)), sol.params, sol.length, 0.0, tr)


def _trajectory_from(sol, infl, pts, normals, r0) -> LiftedTrajectory:
    """Open chains run between the midpoints of the anchor legs; periodic ones
    run one period from the midpoint of the leg entering the first contact."""
    segs = sol.chain.segments
    if infl.geo.periodic:
        shift = infl.geo.shift
        n = len(segs)
        start = 0.5 * (pts[n - 1] - shift + pts[0])
        verts = [start] + list(pts[:n]) + [start + shift]
        contacts = [(k + 1, segs[k], normals[k]) for k in range(n)]
    else:
        start = 0.5 * (pts[0] + pts[1])
        end = 0.5 * (pts[-2] + pts[-1])
        verts = [start] + list(pts[1:-1]) + [end]
        contacts = [(k, segs[k], normals[k]) for k in range(1, len(segs) - 1)]
    verts = [tuple(float(c) for c in v) for v in verts]
    lengths = np.linalg.norm(np.diff(np.array(verts), axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    events = []
    for vi, s, nrm in contacts:
        tube = (s.b, s.z) if s.family == 1 else (s.a, s.z)
        p = verts[vi]
        events.append(CollisionEvent(float(cum[vi]), p, tuple(nrm), s.family, tube,
                                     tuple(int(math.floor(c)) for c in p)))
    # at zero radius the polyline runs through the cores themselves, where
    # crossings are degenerate; the word is the chain's by construction
    crossings = polyline_crossings(verts) if r0 > 0 else []
    return LiftedTrajectory(verts, events, crossings, float(cum[-1]), r0)


def trace_check(traj: LiftedTrajectory, r0: float, tol: float = 1e-6) -> float:
    """Re-fly every leg of an inflated polyline with the billiard simulator.

    From each vertex the ray toward the next vertex must meet no scatterer
    before the next contact, must meet that contact's tube at the expected
    point, and the specular reflection there must continue along the next
    leg.  Returns the largest discrepancy; raises on a missed or extra hit.
    """
    verts = [np.array(v, dtype=float) for v in traj.vertices]
    contact_at = {tuple(ev.point): ev for ev in traj.events}
    worst = 0.0
    for k in range(len(verts) - 1):
        p, q = verts[k], verts[k + 1]
        leg = float(np.linalg.norm(q - p))
        v = (q - p) / leg
        target = contact_at.get(tuple(q))
        ev = nearest_collision(PhaseState(tuple(p), tuple(v)), r0, leg + tol if target else leg)
        if target is None:
            if ev is not None:
                raise ContinuationError(f"leg {k} hits an unexpected scatterer")
            continue
        if ev is None:
            raise ContinuationError(f"leg {k} misses its scatterer")
        if ev.family != target.family or tuple(ev.tube) != tuple(target.tube):
            raise ContinuationError(f"leg {k} hits the wrong scatterer")
        worst = max(worst, abs(float(ev.t) - leg))
        if k + 2 < len(verts):
            nxt = verts[k + 2] - q
            nxt = nxt / np.linalg.norm(nxt)
            out = np.array(reflect(tuple(v), ev.normal))
            worst = max(worst, float(np.linalg.norm(out - nxt)))
    if worst > tol:
        raise ContinuationError(f"trace discrepancy {worst:.3g} exceeds {tol}")
    return worst


# --------------------------------------------------------------------------
# Turn table.

_S6, _S3 = math.sqrt(6), math.sqrt(3)
TURN_TABLE = {
    "aa": _S6, "ab": _S6 + 1.5 * _S3, "ac": 1.5, "ad": _S6,
    "aB": _S6 + 0.5 * _S3, "aC": _S6 + 0.5 * _S3, "aD": _S6,
    "ba": 1.5, "bb": _S6, "bc": _S6 + 2 * _S3, "bd": _S6 + 0.5 * _S3,
    "bC": _S6 + _S3, "bD": 1.5,
    "da": _S6, "db": 1.5, "dc": _S6 + 1.5 * _S3, "dd": _S6,
}


def bound_for_mids(k: int) -> float:
    """Extreme-to-midpoint cell time with k intermediate contacts."""
    if k == 0:
        return 1.5
    return 2 * math.sqrt(1.5) + (k - 1) * _S3 / 2


@dataclass
class TurnRecord:
    turn: str
    computed_time: float      # worst extreme entry/exit, intermediates at midpoints
    bound: float
    relaxed_time: float       # same extremes, intermediates re-minimised
    mids: int
    mids_range: tuple
    chain: list

    @property
    def margin(self) -> float:
        return self.bound - self.computed_time

    @property
    def within(self) -> bool:
        return self.computed_time <= self.bound + 1e-9


def _turn_chains(turn: str):
    """(entry core, mids, exit core) per entry state, fewest mids first."""
    from .chains import _cell_paths, cell_segments, crossing_options, shift_cell
    x, y = turn
    cell = (0, 0, 0)
    prev_cell = shift_cell(cell, x.swapcase())
    out = []
    for X, lv in crossing_options(prev_cell, x):
        for P in cell_segments(prev_cell):
            if P.family == X.family or (lv is not None and P.z != lv):
                continue
            paths = _cell_paths(cell, P, X, lv, y)
            if not paths:
                continue
            (ex, _, _), mids = min(paths.items(), key=lambda kv: (len(kv[1]), kv[0][0]))
            out.append((X, mids, ex))
    return out


def _extreme_times(X, mids, ex):
    """Max over entry/exit endpoints of (pinned, relaxed) in-cell length."""
    pinned, relaxed = 0.0, 0.0
    for ue in (0.0, 1.0):
        for ux in (0.0, 1.0):
            pts = [X.point(ue)] + [m.midpoint for m in mids] + [ex.point(ux)]
            pinned = max(pinned, float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()))
            if mids:
                chain = SegmentChain([X, *mids, ex], "", anchored=(True, True))
                geo = _Geometry(chain)
                u = np.array([ue] + [0.5] * len(mids) + [ux])
                free = np.zeros(len(u), bool)
                free[1:-1] = True
                geo.free = free
                best = geo.length(u)[0]
                for _ in range(2000):
                    p = geo.points(u)
                    for i in range(1, len(u) - 1):
                        a, b = geo.neighbours(p, i)
                        u[i] = min(1.0, max(0.0, _line_step(geo.origins[i], geo.dirs[i], a, b)))
                        p[i] = geo.origins[i] + u[i] * geo.dirs[i]
                    new = geo.length(u)[0]
                    if best - new < 1e-14:
                        best = new
                        break
                    best = new
                relaxed = max(relaxed, best)
            else:
                relaxed = pinned
    return pinned, relaxed


def verify_turn_table() -> list[TurnRecord]:
    """Worst-case in-cell time for each of the 17 tabulated turns.

    Entry and exit contacts range over the endpoints of their cores.  Of the
    possible entry states the one whose shortest admissible in-cell chain has
    the tabulated number of intermediate contacts is used; ``mids_range``
    records the spread over all entry states.
    """
    records = []
    for turn, bound in TURN_TABLE.items():
        options = _turn_chains(turn)
        counts = sorted(len(m) for _, m, _ in options)
        want = min(range(MAX_TABLE_MIDS + 1), key=lambda k: abs(bound_for_mids(k) - bound))
        pick = next((o for o in options if len(o[1]) == want), options[-1])
        pinned, relaxed = _extreme_times(*pick)
        records.append(TurnRecord(turn, pinned, bound, relaxed, len(pick[1]),
                                  (counts[0], counts[-1]),
                                  [s.describe() for s in (pick[0], *pick[1], pick[2])]))
    return records


MAX_TABLE_MIDS = 7


def worst_turn(records: list[TurnRecord]) -> TurnRecord:
    return max(records, key=lambda r: r.computed_time)


def all_turn_extremes() -> dict:
    """Worst pinned time over every turn and every entry state (symmetry variants included)."""
    from .group import LETTERS
    out = {}
    for x in LETTERS:
        for y in LETTERS:
            if y == x.swapcase():
                continue
            times = [_extreme_times(*o)[0] for o in _turn_chains(x + y)]
            if times:
                out[x + y] = max(times)
    return out
