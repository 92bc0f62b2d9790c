import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspcurrents.currents import (
    Bump,
    DiscreteCurrent,
    Window,
    anbn_sequence,
    atoms_in_window,
    box_basepoint,
    count_in_box,
    cusp_pair_sequence,
    default_box_suite,
    draw_suite_translates,
    eta_closed,
    eta_cusp_pair,
    evaluate_box,
    evaluate_bump,
    local_finiteness_check,
    random_word,
    stabilizer_certificate,
    SUITE_TRANSLATES,
)
from cuspcurrents.errors import DegeneracyError, PreconditionError
from cuspcurrents.geom import INF, Arc, BoundaryPoint, Geodesic, PairBox, box_theta_min, mob_apply

from oracles import as_angle_pairs, box_hits, same_pairs, window_hits

R = BoundaryPoint.rational


@pytest.fixture(scope="module")
def ell(P):
    return eta_cusp_pair(P, R(0), INF)


@pytest.fixture(scope="module")
def ab(P):
    return eta_closed(P, "ab")


# -- atoms -----------------------------------------------------------------


def test_closed_atoms_are_conjugation_invariant(P):
    assert eta_closed(P, "ab") == eta_closed(P, "ba")
    assert eta_closed(P, "ab") == eta_closed(P, "BA")  # unoriented
    assert eta_closed(P, "bAabaB") == eta_closed(P, "ab")
    sq = eta_closed(P, "abab")
    assert sq.power == 2 and sq.geodesic == eta_closed(P, "ab").geodesic
    _, box = default_box_suite(P)[1]
    assert count_in_box(P, sq, box) == 2 * count_in_box(P, eta_closed(P, "ab"), box)


def test_parabolic_word_has_no_closed_current(P):
    with pytest.raises(PreconditionError):
        eta_closed(P, "a")
    with pytest.raises(PreconditionError):
        eta_closed(P, "aAbB")


def test_cusp_pair_atoms(P, ell):
    assert stabilizer_certificate(P, ell, 12) == 1
    assert eta_cusp_pair(P, R(2), INF) == ell  # a translate gives the same atom
    with pytest.raises(PreconditionError):
        eta_cusp_pair(P, BoundaryPoint.surd(1, 1, 1, 2), INF)
    with pytest.raises(PreconditionError):
        eta_cusp_pair(P, R(0), R(0))


def test_stabilizers_of_sequence_pairs_are_trivial(P):
    for n in (1, 2, 3):
        assert stabilizer_certificate(P, cusp_pair_sequence(P, "ab", INF, R(0), n), 12) == 1


def test_current_json_round_trip(P, ell, ab):
    mu = DiscreteCurrent([(1.5, ab), (0.25, ell)])
    nu = DiscreteCurrent.from_json(P, mu.to_json())
    assert sorted((w, a.key) for w, a in nu.atoms) == sorted((w, a.key) for w, a in mu.atoms)
    with pytest.raises(PreconditionError):
        DiscreteCurrent([(-1.0, ab)])


def test_atoms_merge(ab):
    mu = DiscreteCurrent([(1.0, ab), (2.0, ab)])
    assert mu.atoms == [(3.0, ab)]


# -- windows ---------------------------------------------------------------


def test_high_window_sees_only_the_imaginary_axis(P, ell):
    win = Window(10j, 0.1)  # sinh(0.1) * 10 < 2: the lines Re z = 2k, k != 0, stay outside
    got = atoms_in_window(P, ell, win)
    assert got == [Geodesic(R(0), INF)]
    assert same_pairs(as_angle_pairs(got), window_hits(P, ell, win.center, win.radius, 12))


def test_zero_radius_window_on_axis(P, ab):
    z = 1 + math.sqrt(2) * 1j  # top of the semicircle |z - 1| = sqrt 2
    through = Geodesic(BoundaryPoint.surd(1, -1, 1, 2), BoundaryPoint.surd(1, 1, 1, 2))
    assert atoms_in_window(P, ab, Window(z, 0.0)) == [through]


@pytest.mark.parametrize("h", ["b", "aB", "BAb"])
def test_window_equivariance(P, ab, ell, h):
    m = P.matrix(h)
    a, b, c, d = P.float_matrix(h)
    z = 0.3 + 0.8j
    hz = (a * z + b) / (c * z + d)
    for atom in (ab, ell):
        base = atoms_in_window(P, atom, Window(z, 0.9))
        moved = atoms_in_window(P, atom, Window(hz, 0.9))
        assert set(moved) == {m(g) for g in base}


def test_windows_match_brute_force(P, ab, ell):
    rng = random.Random(5)
    for _ in range(5):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.5))
        r = rng.uniform(0.1, 1.2)
        for atom in (ab, ell, eta_closed(P, "aabAb")):
            got = as_angle_pairs(atoms_in_window(P, atom, Window(z, r)))
            assert same_pairs(got, window_hits(P, atom, z, r, 12))


def test_window_validation():
    with pytest.raises(PreconditionError):
        Window(-1j, 1.0)
    with pytest.raises(PreconditionError):
        Window(1j, math.inf)


# -- boxes -----------------------------------------------------------------


def test_suite_shape(P):
    suite = default_box_suite(P)
    assert len(suite) == 5
    for _, box in suite:
        assert box_theta_min(box, box_basepoint(box)) >= 0.2
    assert draw_suite_translates(P, seed=0) == list(SUITE_TRANSLATES)


def test_cusp_box_counts_one(P, ell):
    _, box = default_box_suite(P)[0]
    mu = DiscreteCurrent.of(ell)
    assert evaluate_box(P, mu, box) == 1.0
    assert len(box_hits(P, ell, box, 12)) == 1
    assert evaluate_box(P, DiscreteCurrent(), box) == 0.0
    assert evaluate_box(P, mu.scaled(2.0), box) == 2.0


def test_box_counts_match_brute_force(P, ab, ell):
    for _, box in default_box_suite(P):
        for atom in (ab, ell, eta_closed(P, "aabb")):
            n = count_in_box(P, atom, box)
            assert n == len(box_hits(P, atom, box, 12))


def test_box_collision_is_an_error(P, ell):
    box = PairBox(Arc(R(0), R(1, 3)), Arc(R(3), R(-3)))
    with pytest.raises(DegeneracyError):
        evaluate_box(P, DiscreteCurrent.of(ell), box)


@given(st.integers(0, 10**6))
def test_counts_are_group_invariant(P, ab, ell, seed):
    rng = random.Random(seed)
    h = random_word(rng, rng.randint(1, 4))
    m = P.matrix(h)
    mu = DiscreteCurrent([(1.0, ab), (1.0, ell), (1.0, eta_closed(P, "aabb"))])
    for _, box in default_box_suite(P)[:2]:
        v = evaluate_box(P, mu, box)
        assert v == int(v) >= 0
        assert evaluate_box(P, mu, box.pushed(m)) == v


# -- bumps -----------------------------------------------------------------


def test_bump_off_support_is_zero(P, ell):
    box = PairBox(Arc(R(1, 5), R(2, 5)), Arc(R(5, 2), R(3)))
    assert evaluate_bump(P, DiscreteCurrent.of(ell), Bump(box, 0.02)) == 0.0


def test_bump_equals_weight_on_core(P, ell):
    _, box = default_box_suite(P)[0]
    assert evaluate_bump(P, DiscreteCurrent.of(ell, 0.7), Bump(box, 0.05)) == pytest.approx(0.7)


def test_bump_within_box_envelope(P, ab):
    _, box = default_box_suite(P)[1]
    mu = DiscreteCurrent.of(ab)
    margin = 0.05
    core = evaluate_box(P, mu, box)
    # widened box containing the whole support of the bump
    wide = PairBox(
        Arc(R(-13, 20), R(-3, 20)), Arc(R(43, 20), R(53, 20))
    )
    bump = evaluate_bump(P, mu, Bump(box, margin))
    assert core <= bump + 1e-12
    assert bump - core <= evaluate_box(P, mu, wide) - core + 1e-12
    with pytest.raises(PreconditionError):
        evaluate_bump(P, mu, Bump(box, 0.0))


# -- local finiteness -------------------------------------------------------


def test_local_finiteness(P, ell, ab):
    v = local_finiteness_check(P, DiscreteCurrent.of(ell))
    assert v == int(v) and 0 < v < math.inf
    assert local_finiteness_check(P, DiscreteCurrent()) == 0
    mu = DiscreteCurrent([(1.0, ell), (2.0, ab)])
    assert local_finiteness_check(P, mu.scaled(3.0)) == pytest.approx(3.0 * local_finiteness_check(P, mu))


# -- sequences -------------------------------------------------------------


def test_anbn_axes(P):
    for n in range(1, 9):
        atom = anbn_sequence(P, n)
        x, y = atom.geodesic.endpoints
        # roots of 2n x^2 - 4n^2 x - 2n = 0 are n -+ sqrt(n^2 + 1), up to the
        # cyclic rotation chosen for the canonical word: check the axis of a^n b^n
        from cuspcurrents.fuchsian import axis

        ax = axis(P, "a" * n + "b" * n)
        assert set(ax.endpoints) == {BoundaryPoint.surd(n, -1, 1, n * n + 1), BoundaryPoint.surd(n, 1, 1, n * n + 1)}
        for p in ax.endpoints:
            v = float(p)
            assert abs(2 * n * v * v - 4 * n * n * v - 2 * n) < 1e-9 * max(1, v * v)
        assert eta_closed(P, "b" * n + "a" * n) == atom
    with pytest.raises(PreconditionError):
        anbn_sequence(P, 0)


def test_cusp_pair_sequence_first_term(P):
    got = cusp_pair_sequence(P, "ab", INF, R(0), 1)
    ab = P.matrix("ab")
    p, q = mob_apply(ab.inverse(), INF), mob_apply(ab, R(0))
    assert (p, q) == (R(-1, 2), R(2))
    assert got == eta_cusp_pair(P, p, q)


def test_cusp_pair_sequence_needs_crossing(P):
    with pytest.raises(PreconditionError):
        cusp_pair_sequence(P, "ab", R(3), R(4), 1)
