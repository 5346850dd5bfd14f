import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiard_homotopy import oracle
from billiard_homotopy.group import (
    LETTERS,
    RELATORS,
    EndApprox,
    GroupElement,
    LengthInterval,
    ResourceLimitError,
    TooShortError,
    are_equal,
    enumerate_ball,
    end_prefix,
    free_reduce,
    geodesic_length,
    geodesic_length_exact,
    growth_rate,
    inverse,
    is_identity,
    normal_form,
    shortlex_geodesic,
)

words = st.text(alphabet=LETTERS, max_size=14)


# --- independent oracle first ------------------------------------------------

def test_oracle_ball_counts_small_radius():
    assert oracle.ball_counts(2) == [1, 9, 53]


def test_engine_matches_oracle_through_radius_3():
    assert enumerate_ball(3).ball_counts == oracle.ball_counts(3)


def test_oracle_invariants_are_homomorphisms():
    for r in RELATORS:
        assert oracle.invariants(r) == ((0, 0, 0), "", "")


def test_oracle_derivation_finds_relator_conjugates():
    assert oracle.is_trivial_by_derivation("BabA")
    assert oracle.is_trivial_by_derivation("cdBD")
    assert not oracle.is_trivial_by_derivation("ad", max_len=6, max_nodes=2000)


@pytest.fixture(scope="module")
def ball4():
    return enumerate_ball(4, keep_words=True)


def test_equality_agrees_with_bfs_table_radius_4(ball4):
    # two words are equal iff they land on the same canonical ball entry
    reps = list(ball4.canonical.values())
    rng = np.random.default_rng(5)
    for _ in range(3000):
        u, v = rng.choice(reps, 2)
        assert are_equal(u, v) == (u == v)
        w = u + "abAB" + inverse(u) + v
        assert are_equal(w, v)


def test_geodesic_length_matches_bfs_on_whole_radius_4_ball(ball4):
    for nf, w in ball4.canonical.items():
        assert geodesic_length_exact(w) == len(w)
        assert shortlex_geodesic(w) == w


# --- examples -----------------------------------------------------------------

def test_sphere_counts():
    assert enumerate_ball(4).sphere_counts == [1, 8, 44, 224, 1124]


def test_relators_are_trivial():
    for r in RELATORS:
        assert is_identity(r)
        assert is_identity(inverse(r))


def test_conjugation_relation():
    assert are_equal("dbD", "c")
    assert are_equal("Dcd", "b")
    assert not are_equal("ad", "da")
    assert not are_equal("bd", "db")


def test_free_reduce_examples():
    assert free_reduce("aAbB") == ""
    assert free_reduce("abBc") == "ac"
    assert free_reduce(free_reduce("dcCDa")) == "a"


def test_geodesic_lengths():
    assert geodesic_length("") == 0
    assert geodesic_length("b" * 7) == 7
    assert geodesic_length("dbD") == 1
    assert geodesic_length("abAB") == 0


def test_interval_fallback_brackets_exact_value():
    w = "d" + "b" * 30 + "D" + "C" * 29
    res = geodesic_length(w, shift_cap=2)
    assert isinstance(res, LengthInterval)
    exact = geodesic_length_exact(w)
    assert res.lower <= exact <= res.upper


def test_end_prefix_and_too_short():
    e = end_prefix("bbbbb", 3)
    assert e == EndApprox("bbb", 3)
    with pytest.raises(TooShortError):
        end_prefix("ab", 3)
    with pytest.raises(ValueError):
        EndApprox("ab", 3)


def test_group_element_semantics():
    x = GroupElement("dbD")
    assert x == GroupElement("c")
    assert len({x, GroupElement("c"), GroupElement("b")}) == 2
    assert (x * x.inverse()) == GroupElement("")
    assert len(GroupElement("abAB" + "d")) == 1


def test_growth_window_and_linear_subgroup():
    rep = growth_rate(enumerate_ball(6))
    assert math.log(3) <= rep.rate <= math.log(7)
    assert growth_rate(enumerate_ball(8, "aA")).rate < 0.3
    with pytest.raises(ValueError):
        growth_rate(enumerate_ball(3))


def test_state_cap_and_radius_cap():
    with pytest.raises(ResourceLimitError):
        enumerate_ball(6, state_cap=100)
    with pytest.raises(ValueError):
        enumerate_ball(9)


def test_invalid_letters_rejected():
    with pytest.raises(ValueError):
        normal_form("abx")


# --- properties -----------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(words, st.integers(0, 14), st.sampled_from(RELATORS), st.integers(0, 3), st.booleans())
def test_relator_insertion_is_invisible(w, pos, rel, rot, inv):
    r = inverse(rel) if inv else rel
    r = r[rot:] + r[:rot]
    pos = min(pos, len(w))
    assert normal_form(w[:pos] + r + w[pos:]) == normal_form(w)


@settings(max_examples=300, deadline=None)
@given(words, words)
def test_inverse_and_product(u, v):
    assert is_identity(u + inverse(u))
    assert are_equal(inverse(u + v), inverse(v) + inverse(u))


@settings(max_examples=200, deadline=None)
@given(words)
def test_reduction_idempotent_and_geodesic_consistent(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    g = shortlex_geodesic(w)
    assert are_equal(g, w)
    assert len(g) == geodesic_length_exact(w) <= len(r)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_length_is_a_metric(u, v):
    assert geodesic_length_exact(u + v) <= geodesic_length_exact(u) + geodesic_length_exact(v)
    assert geodesic_length_exact(u) == geodesic_length_exact(inverse(u))


def test_end_prefix_stable_under_geodesic_extension():
    rng = np.random.default_rng(2)
    for _ in range(200):
        w = "".join(rng.choice(list(LETTERS), 8))
        g = shortlex_geodesic(w)
        if len(g) < 6:
            continue
        assert end_prefix(g[:6], 4) == end_prefix(g, 4)


def test_normal_forms_of_all_short_words_count_the_ball():
    seen = set()
    for n in range(4):
        for t in itertools.product(LETTERS, repeat=n):
            seen.add(normal_form("".join(t)))
    assert len(seen) == enumerate_ball(3).ball_counts[-1]
