"""Acceptance checks shared by ``verify-all`` and the test-suite.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
criterion, so a run always reports every line.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .chains import BC_BOUND, build_chain
from .entropy import entropy_window, estimate, free_subgroup_growth
from .geometry import TangencyError, random_state, simulate
from .group import (
    RELATORS,
    are_equal,
    enumerate_ball,
    free_reduce,
    growth_rate,
    inverse,
    normal_form,
    random_word,
)
from .rotation import (
    LOWER_SPEED,
    construct_fast,
    density_match,
    lower_bound_report,
    random_geodesic_word,
    upper_bound_report,
)
from .solver import inflate, minimize, trace_check, verify_turn_table, worst_turn


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail}"


def _timed(number, name, fn, *args):
    t0 = time.perf_counter()
    passed, detail = fn(*args)
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t0)


def check_turn_table():
    t0 = time.perf_counter()
    records = verify_turn_table()
    elapsed = time.perf_counter() - t0
    worst = worst_turn(records)
    over = [r.turn for r in records if r.computed_time > r.bound + 1e-6]
    ok = (len(records) == 17 and not over and abs(worst.computed_time - BC_BOUND) <= 1e-6
          and elapsed < 10)
    return ok, {"turns": len(records), "over_bound": over, "worst": worst.turn,
                "max_time": round(worst.computed_time, 12), "seconds": round(elapsed, 3)}


def check_bc_chain():
    records = {r.turn: r for r in verify_turn_table()}
    bc = records["bc"]
    s = math.sqrt
    expected = s(1.5) + 4 * (s(3) / 2) + s(1.5)
    ok = abs(bc.computed_time - expected) <= 1e-9 and abs(expected - (s(6) + 2 * s(3))) <= 1e-12
    return ok, {"time": bc.computed_time, "expected": expected, "mids": bc.mids, "chain": bc.chain}


def _safe_orbits(rng, n, r0, T):
    out, skipped = [], 0
    while len(out) < n:
        try:
            out.append(simulate(random_state(rng, r0), r0, T))
        except TangencyError:
            skipped += 1
    return out, skipped


def check_upper_bound(seed=0, n=100, T=100.0, r0=0.05):
    rng = np.random.default_rng(seed)
    orbits, skipped = _safe_orbits(rng, n, r0, T)
    rep = upper_bound_report(orbits)
    return rep.ok, {"samples": rep.n_samples, "max_speed": round(rep.max_speed, 6),
                    "limit": round(math.sqrt(3) + 3 / T, 6), "violations": len(rep.violations),
                    "tangent_redraws": skipped}


def check_lower_bound(seed=0, n=50, length=24):
    rng = np.random.default_rng(seed)
    samples = [construct_fast(random_geodesic_word(rng, length), length) for _ in range(n)]
    rep = lower_bound_report(samples)
    return rep.ok, {"samples": rep.n_samples, "min_speed": round(rep.min_speed, 9),
                    "target": round(LOWER_SPEED, 9), "violations": len(rep.violations)}


def _insert_relator(rng, w):
    r = RELATORS[int(rng.integers(len(RELATORS)))]
    if rng.random() < 0.5:
        r = inverse(r)
    k = int(rng.integers(len(r)))
    r = r[k:] + r[:k]
    i = int(rng.integers(len(w) + 1))
    return w[:i] + r + w[i:]


def check_group(seed=0, n_words=10_000):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_words):
        w = random_word(rng, int(rng.integers(0, 13)))
        u = _insert_relator(rng, w)
        if normal_form(u) != normal_form(w) or not are_equal(free_reduce(u), w):
            bad += 1
    engine = enumerate_ball(2).ball_counts
    brute = oracle.ball_counts(2)
    free = free_subgroup_growth(8)
    ok = bad == 0 and engine[1:] == brute[1:] and free.collisions == 0
    return ok, {"relator_failures": bad, "ball_engine": engine[1:], "ball_oracle": brute[1:],
                "ad_spheres": free.sphere_counts[1:], "ad_collisions": free.collisions}


def check_growth(radius=8):
    t0 = time.perf_counter()
    table = enumerate_ball(radius)
    rep = growth_rate(table)
    elapsed = time.perf_counter() - t0
    return rep.in_window and elapsed < 60, {"rate": round(rep.rate, 6), "window": [round(x, 6) for x in rep.window],
                                            "ball": rep.ball_counts[-1], "seconds": round(elapsed, 2)}


def check_entropy(word_cap=5):
    lower, upper = entropy_window()
    rep = estimate([1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30], word_cap)
    ok = (abs(lower - 0.185777512) <= 1e-9 and abs(upper - 3.370415245) <= 1e-9
          and 0 < rep.slope <= upper + 0.05 and rep.rate >= 0.1 and rep.rate <= upper + 0.05)
    return ok, {"window": (lower, upper), "slope": round(rep.slope, 6), "rate_T30": round(rep.rate, 6),
                "n_T": rep.counts}


def check_solver(seed=0, n=100):
    rng = np.random.default_rng(seed)
    non_monotone = worst_residual = worst_gap = 0.0
    for _ in range(n):
        chain = build_chain(random_word(rng, int(rng.integers(1, 13))))
        s1 = minimize(chain, rng=rng)
        s2 = minimize(chain, rng=rng)
        non_monotone = max(non_monotone, float(np.diff(s1.history).max(initial=0.0)),
                           float(np.diff(s2.history).max(initial=0.0)))
        worst_residual = max(worst_residual, s1.residual, s2.residual)
        worst_gap = max(worst_gap, abs(s1.length - s2.length))
    ok = non_monotone <= 0.0 and worst_residual < 1e-8 and worst_gap < 1e-8
    return ok, {"chains": n, "max_increase": non_monotone, "max_residual": worst_residual,
                "max_init_gap": worst_gap}


def check_round_trip(seed=0, n=20, r0=0.01):
    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(n):
        w = random_word(rng, int(rng.integers(1, 13)))
        try:
            inf = inflate(minimize(build_chain(w)), r0)
            trace_check(inf.trajectory, r0)
            if not are_equal(free_reduce(inf.trajectory.word), w):
                failures.append((w, inf.trajectory.word))
        except Exception as exc:   # report, never abort the run
            failures.append((w, f"{type(exc).__name__}: {exc}"))
    return not failures, {"words": n, "failures": failures}


def check_physics(seed=0, r0=0.05, collisions=10_000, T_rev=50.0, dps=60):
    rng = np.random.default_rng(seed)
    s0 = random_state(rng, r0)
    tr = simulate(s0, r0, 1e9, record_crossings=False, renormalize=False, max_events=collisions)
    drift = tr.final_state.speed_error()
    s1 = random_state(rng, r0)
    fwd = simulate(s1, r0, T_rev, dps=dps, record_crossings=False)
    f = fwd.final_state
    back = simulate(f.reversed(), r0, T_rev, dps=dps, record_crossings=False)
    err = max(abs(float(a) - b) for a, b in zip(back.final_state.q, s1.q))
    ok = len(tr.events) >= collisions and drift < 1e-12 and err < 1e-6
    return ok, {"collisions": len(tr.events), "speed_drift": drift, "reversal_error": err}


def check_density(seed=0, n=10, length=24):
    rng = np.random.default_rng(seed)
    misses, gaps = [], []
    for _ in range(n):
        smp = construct_fast(random_geodesic_word(rng, length), length)
        match = density_match(smp)
        if match is None:
            misses.append(smp.word)
        else:
            gaps.append(abs(match.s - smp.s))
    return not misses, {"samples": n, "misses": misses, "max_speed_gap": round(max(gaps, default=0.0), 6)}


CHECKS = [
    (1, "turn table", check_turn_table),
    (2, "bc extremal chain", check_bc_chain),
    (3, "upper radial bound", check_upper_bound),
    (4, "lower radial bound", check_lower_bound),
    (5, "group engine", check_group),
    (6, "growth window", check_growth),
    (7, "entropy window", check_entropy),
    (8, "solver properties", check_solver),
    (9, "itinerary round trip", check_round_trip),
    (10, "simulator physics", check_physics),
    (11, "periodic density", check_density),
]


def run_check(number: int) -> CheckResult:
    for k, name, fn in CHECKS:
        if k == number:
            return _timed(k, name, fn)
    raise KeyError(number)


def run_all() -> list[CheckResult]:
    return [_timed(k, name, fn) for k, name, fn in CHECKS]
