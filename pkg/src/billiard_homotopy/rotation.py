"""Homotopical rotation samples (s, e): escape speed and a finite end approximation.

Points with s = 0 are identified (the cone point), so two zero-speed samples
are equal whatever their end prefixes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chains import BC_BOUND, build_chain, insert_idle_runs
from .geometry import LiftedTrajectory
from .group import (
    EndApprox,
    LengthInterval,
    end_prefix,
    free_reduce,
    geodesic_length,
    is_reduced,
    random_word,
)
from .solver import PolylineSolution, close_periodic, minimize

LOWER_SPEED = 1.0 / BC_BOUND
UPPER_SPEED = math.sqrt(3.0)
DEFAULT_DEPTH = 4
SLOWDOWN_TOL = 0.05


@dataclass(eq=False)
class RotationSample:
    s: float
    end: Optional[EndApprox]
    source: str                      # simulated | constructed | periodic
    duration: float
    flagged: bool = False            # speed uses an interval midpoint
    word: str = ""
    solution: Optional[PolylineSolution] = field(default=None, repr=False)
    idle_runs: int = 0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("speed must be non-negative")
        if self.source not in ("simulated", "constructed", "periodic"):
            raise ValueError(f"unknown source {self.source!r}")

    @property
    def is_cone_point(self) -> bool:
        return self.s == 0

    def __eq__(self, other):
        if not isinstance(other, RotationSample):
            return NotImplemented
        if self.s == 0 and other.s == 0:
            return True
        return self.s == other.s and self.end == other.end

    def __hash__(self):
        return hash(0.0) if self.s == 0 else hash((self.s, self.end))

    def as_dict(self) -> dict:
        return {
            "speed": self.s,
            "end_prefix": self.end.prefix if self.end else "",
            "source": self.source,
            "duration": self.duration,
        }


@dataclass
class BoundReport:
    n_samples: int
    max_speed: float
    min_speed: float
    lower_target: float = LOWER_SPEED
    upper_target: float = UPPER_SPEED
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "max_speed": self.max_speed,
            "min_speed": self.min_speed,
            "lower_target": self.lower_target,
            "upper_target": self.upper_target,
            "violations": self.violations,
        }


def _length(w: str):
    L = geodesic_length(w)
    if isinstance(L, LengthInterval):
        return L.midpoint, True
    return L, False


def _end(w: str, length, k: int) -> Optional[EndApprox]:
    if length == 0:
        return None
    return end_prefix(w, k)


def rotation_sample(tr: LiftedTrajectory, k: int = DEFAULT_DEPTH) -> RotationSample:
    if not tr.duration > 0:
        raise ValueError("trajectory duration must be positive")
    w = free_reduce(tr.word)
    L, flagged = _length(w)
    return RotationSample(float(L) / float(tr.duration), _end(w, L, k), "simulated",
                          float(tr.duration), flagged, w)


def speed_counts(tr: LiftedTrajectory) -> float:
    """Face crossings per unit time, (n_a + n_b + n_c + n_d) / T."""
    return len(tr.crossings) / float(tr.duration)


def crossing_time(sol: PolylineSolution) -> float:
    """Time from the trajectory start (midpoint of the first anchor leg) to the last crossing."""
    return 0.5 * float(sol.leg_lengths[0]) + sol.crossing_span


def _constructed(word: str, sol: PolylineSolution, k: int, idle: int = 0) -> RotationSample:
    T = crossing_time(sol)
    return RotationSample(len(word) / T, end_prefix(word, min(k, len(word))), "constructed", T,
                          word=word, solution=sol, idle_runs=idle)


def extend_word(e_word: str, n_cells: int) -> str:
    if not e_word:
        raise ValueError("empty end word")
    reps = -(-n_cells // len(e_word))
    return (e_word * reps)[:n_cells]


def construct_fast(e_word: str, n_cells: int, k: int = DEFAULT_DEPTH) -> RotationSample:
    """Fastest constructed trajectory following ``e_word`` (extended periodically).

    The word must be geodesic, so crossings count word length; every cell
    is crossed in time at most sqrt(6) + 2 sqrt(3).
    """
    word = extend_word(e_word, n_cells)
    if not is_reduced(word):
        raise ValueError(f"periodic extension {word!r} is not reduced")
    L, _ = _length(word)
    if L != len(word):
        raise ValueError(f"{word!r} is not geodesic (length {L})")
    sol = minimize(build_chain(word))
    return _constructed(word, sol, k)


def _with_idle(sample: RotationSample, count: int) -> RotationSample:
    chain = insert_idle_runs(build_chain(sample.word), count)
    return _constructed(sample.word, minimize(chain), sample.end.depth, count)


def slow_down(sample: RotationSample, t: float) -> RotationSample:
    """Same end, speed within 5% of ``t``, by inserting idle runs."""
    if sample.source != "constructed" or sample.solution is None:
        raise ValueError("slow_down needs a constructed sample")
    if not 0 <= t <= sample.s + 1e-12:
        raise ValueError("target speed must lie in [0, s]")
    if t == 0:
        return RotationSample(0.0, None, "constructed", math.inf, word=sample.word)
    if abs(t - sample.s) <= SLOWDOWN_TOL * t:
        return sample
    n = len(sample.word)
    target_T = n / t
    one = _with_idle(sample, 1)
    per_idle = max(one.duration - sample.duration, 1e-6)
    count = max(1, round((target_T - sample.duration) / per_idle))
    best = one
    for _ in range(12):
        cur = _with_idle(sample, count)
        if abs(cur.s - t) < abs(best.s - t):
            best = cur
        if abs(cur.s - t) <= SLOWDOWN_TOL * t:
            return cur
        # secant-style correction from the measured time per idle run
        per_idle = max((cur.duration - sample.duration) / count, 1e-6)
        nxt = max(1, round((target_T - sample.duration) / per_idle))
        if nxt == count:
            break
        count = nxt
    return best


def _periodic_end(w: str, k: int) -> Optional[EndApprox]:
    reps = max(2, -(-2 * k // len(w)))
    L, _ = _length(w * reps)
    return _end(w * reps, L, k)


def periodic_sample(w: str, v, k: int = DEFAULT_DEPTH, idle: int = 0) -> RotationSample:
    """Speed and end of the closed orbit for cyclic word w with translation v.

    The speed is the stable word length per unit time over one period.
    ``idle`` inserts word-neutral idle runs into each period.
    """
    sol = close_periodic(w, v)
    if idle:
        sol = minimize(insert_idle_runs(sol.chain, idle))
    word = sol.chain.word
    reps = 4
    L, flagged = _length(word * reps)
    s = float(L) / (reps * sol.length)
    return RotationSample(s, _periodic_end(word, k), "periodic", sol.length, flagged, word,
                          sol, idle)


def displacement(w: str) -> tuple:
    from .chains import STEP
    return tuple(int(sum(STEP[ch][i] for ch in w)) for i in range(3))


def density_match(sample: RotationSample, k: int = DEFAULT_DEPTH, tol: float = SLOWDOWN_TOL,
                  max_idle: int = 40) -> Optional[RotationSample]:
    """A periodic orbit whose end agrees with ``sample`` to depth k and whose
    speed is within ``tol``.

    Candidates repeat longer and longer prefixes of the sample's word; a
    periodic orbit that is too fast is slowed by idle runs per period.
    """
    word = sample.word
    target = sample.end.prefix[:k] if sample.end else ""
    for m in range(k, len(word) + 1):
        w = word[:m]
        v = displacement(w)
        if not is_reduced(w + w[0]) or v == (0, 0, 0):
            continue
        try:
            ps = periodic_sample(w, v, k)
        except (ValueError, RuntimeError):
            continue
        if ps.end is None or ps.end.prefix != target:
            continue
        if abs(ps.s - sample.s) <= tol:
            return ps
        if ps.s > sample.s:
            for idle in range(1, max_idle + 1):
                slow = periodic_sample(w, v, k, idle)
                if abs(slow.s - sample.s) <= tol:
                    return slow
                if slow.s < sample.s:
                    break
    return None


def random_geodesic_word(rng, length: int, tries: int = 1000) -> str:
    """Uniform reduced word of the given length, redrawn until geodesic."""
    for _ in range(tries):
        w = random_word(rng, length)
        if _length(w)[0] == length:
            return w
    raise RuntimeError("no geodesic word found")


def upper_bound_report(trajectories) -> BoundReport:
    speeds, violations = [], []
    for i, tr in enumerate(trajectories):
        s = speed_counts(tr)
        speeds.append(s)
        if s > UPPER_SPEED + 3.0 / float(tr.duration):
            violations.append({"index": i, "speed": s, "duration": float(tr.duration)})
    return BoundReport(len(speeds), max(speeds, default=0.0), min(speeds, default=0.0),
                       violations=violations)


def lower_bound_report(samples) -> BoundReport:
    speeds = [smp.s for smp in samples]
    violations = [{"index": i, "word": smp.word, "speed": smp.s}
                  for i, smp in enumerate(samples) if smp.s < LOWER_SPEED - 1e-9]
    return BoundReport(len(speeds), max(speeds, default=0.0), min(speeds, default=0.0),
                       violations=violations)
