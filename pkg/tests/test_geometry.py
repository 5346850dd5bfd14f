import math

import mpmath
import numpy as np
import pytest

from billiard_homotopy.geometry import (
    DegenerateCrossingError,
    PhaseState,
    TangencyError,
    distance_to_tubes,
    face_crossings,
    nearest_collision,
    polyline_crossings,
    random_state,
    reflect,
    simulate,
    validate_radius,
)
from billiard_homotopy.group import are_equal, free_reduce, is_identity


def test_head_on_hit_family_2():
    ev = nearest_collision(PhaseState((0.25, 0.5, 0.5), (-1, 0, 0)), 0.1, 10)
    assert ev.family == 2
    assert ev.t == pytest.approx(0.15, abs=1e-12)
    assert ev.point == pytest.approx((0.1, 0.5, 0.5), abs=1e-12)
    assert ev.normal == pytest.approx((1, 0, 0), abs=1e-12)


def test_parallel_ray_misses():
    assert nearest_collision(PhaseState((0.5, 0.5, 0.25), (1, 0, 0)), 0.1, 10) is None


def test_departing_from_surface_has_no_hit():
    assert nearest_collision(PhaseState((0.1, 0.5, 0.5), (1, 0, 0)), 0.1, 0.5) is None


def test_event_geometry_invariants():
    rng = np.random.default_rng(4)
    tr = simulate(random_state(rng, 0.05), 0.05, 300)
    assert tr.events
    for ev in tr.events:
        n = np.array(ev.normal, float)
        p = np.array(ev.point, float)
        assert abs(np.linalg.norm(n) - 1) < 1e-12
        if ev.family == 1:
            assert abs(n[0]) < 1e-12
            core = np.array([p[0], ev.tube[0], ev.tube[1]])
        else:
            assert abs(n[1]) < 1e-12
            core = np.array([ev.tube[0], p[1], ev.tube[1] + 0.5])
        assert abs(np.linalg.norm(p - core) - 0.05) < 1e-9


def test_reflect_examples():
    assert reflect((-1, 0, 0), (1, 0, 0)) == pytest.approx((1, 0, 0))
    s = math.sqrt(2) / 2
    assert reflect((-s, s, 0), (1, 0, 0)) == pytest.approx((s, s, 0))
    with pytest.raises(ValueError):
        reflect((0, 1, 0), (1, 0, 0))


def test_specular_law_at_every_event():
    rng = np.random.default_rng(8)
    s0 = random_state(rng, 0.05)
    tr = simulate(s0, 0.05, 400)
    verts = [np.array(v, float) for v in tr.vertices]
    for k, ev in enumerate(tr.events):
        vin = verts[k + 1] - verts[k]
        vout = verts[k + 2] - verts[k + 1]
        vin, vout = vin / np.linalg.norm(vin), vout / np.linalg.norm(vout)
        n = np.array(ev.normal, float)
        assert vout @ n == pytest.approx(-(vin @ n), abs=1e-10)
        assert np.linalg.norm((vout - (vout @ n) * n) - (vin - (vin @ n) * n)) < 1e-10


def test_free_flight_reads_b_cubed():
    tr = simulate(PhaseState((0.5, 0.5, 0.25), (1, 0, 0)), 0.1, 3)
    assert not tr.events
    word, counts = face_crossings(tr)
    assert word == "bbb"
    assert counts == {"a": 0, "b": 3, "c": 0, "d": 0}


def test_head_on_bounce_retraces():
    tr = simulate(PhaseState((0.25, 0.5, 0.5), (-1, 0, 0)), 0.1, 0.3)
    assert len(tr.events) == 1
    assert float(tr.events[0].t) == pytest.approx(0.15)
    assert tr.final_state.q == pytest.approx((0.25, 0.5, 0.5), abs=1e-12)
    assert tr.arc_length() == pytest.approx(0.3)


def test_energy_drift_without_renormalisation():
    rng = np.random.default_rng(11)
    tr = simulate(random_state(rng, 0.05), 0.05, 1e9, record_crossings=False,
                  renormalize=False, max_events=10_000)
    assert len(tr.events) == 10_000
    assert tr.final_state.speed_error() < 1e-12


def test_time_reversal_high_precision():
    rng = np.random.default_rng(12)
    s0 = random_state(rng, 0.05)
    fwd = simulate(s0, 0.05, 50, dps=60, record_crossings=False)
    back = simulate(fwd.final_state.reversed(), 0.05, 50, dps=60, record_crossings=False)
    with mpmath.workdps(60):
        err = max(abs(a - mpmath.mpf(b)) for a, b in zip(back.final_state.q, s0.q))
    assert len(fwd.events) > 3
    assert err < 1e-6


def test_float_reversal_holds_over_short_horizon():
    rng = np.random.default_rng(13)
    s0 = random_state(rng, 0.05)
    fwd = simulate(s0, 0.05, 10, record_crossings=False)
    back = simulate(fwd.final_state.reversed(), 0.05, 10, record_crossings=False)
    assert back.final_state.q == pytest.approx(s0.q, abs=1e-6)


def _separation_time(tr1, tr2, tol=1e-4):
    for e1, e2 in zip(tr1.events, tr2.events):
        if e1.tube != e2.tube or e1.family != e2.family or math.dist(e1.point, e2.point) > tol:
            return float(min(e1.t, e2.t))
    return math.inf


def test_itinerary_stable_under_tiny_perturbation_until_separation():
    rng = np.random.default_rng(21)
    compared = 0
    for _ in range(100):
        s0 = random_state(rng, 0.05)
        s1 = PhaseState(tuple(x + 1e-8 for x in s0.q), s0.v)
        try:
            a, b = simulate(s0, 0.05, 50), simulate(s1, 0.05, 50)
        except (TangencyError, DegenerateCrossingError):
            continue
        t_sep = _separation_time(a, b)
        wa = "".join(c.letter for c in a.crossings if c.t < t_sep - 1e-3)
        wb = "".join(c.letter for c in b.crossings if c.t < t_sep - 1e-3)
        assert free_reduce(wa) == free_reduce(wb)
        compared += 1
    assert compared >= 95


def test_escape_speed_inequality():
    rng = np.random.default_rng(31)
    for _ in range(30):
        tr = simulate(random_state(rng, 0.05), 0.05, 60)
        n = sum(tr.counts.values())
        assert (n - 3) / float(tr.duration) <= math.sqrt(3)


def test_crossing_letters():
    assert [c.letter for c in polyline_crossings([(0.5, 0.2, 0.25), (0.5, 1.2, 0.25)])] == ["a"]
    assert [c.letter for c in polyline_crossings([(0.5, 0.2, 0.75), (1.5, 0.2, 0.75)])] == ["c"]
    loop = polyline_crossings([(0.5, 0.2, 0.25), (1.5, 0.2, 0.25), (0.5, 0.3, 0.25)])
    assert is_identity("".join(c.letter for c in loop))


def test_crossing_at_scatterer_height_rejected():
    with pytest.raises(DegenerateCrossingError):
        polyline_crossings([(0.5, 0.2, 0.5), (1.5, 0.2, 0.5)])


def test_relation_realised_by_paths():
    # up through the top face, across below the scatterer height, back down
    below = polyline_crossings([(0.5, 0.5, 0.75), (0.5, 0.5, 1.25), (1.5, 0.5, 1.25), (1.5, 0.5, 0.75)])
    above = polyline_crossings([(0.5, 0.5, 0.75), (1.5, 0.5, 0.75)])
    wb = "".join(c.letter for c in below)
    wa = "".join(c.letter for c in above)
    assert wb == "dbD" and wa == "c"
    assert are_equal(wb, wa)


def test_radius_validation():
    with pytest.raises(ValueError):
        validate_radius(0.25)
    with pytest.raises(ValueError):
        simulate(PhaseState((0.5, 0.5, 0.25), (1, 0, 0)), 0.3, 1)
    with pytest.raises(ValueError):
        simulate(PhaseState((0.0, 0.5, 0.5), (1, 0, 0)), 0.1, 1)


def test_tangent_start_detected():
    # grazes the family-2 tube at x1 = 1 from above
    with pytest.raises(TangencyError):
        simulate(PhaseState((0.5, 0.3, 0.6), (1, 0, 0)), 0.1, 2)


def test_random_states_are_outside_tubes():
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = random_state(rng, 0.2)
        assert distance_to_tubes(s.q, 0.2) > 0
        assert s.speed_error() < 1e-12
