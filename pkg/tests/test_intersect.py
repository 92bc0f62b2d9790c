import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspcurrents.currents import DiscreteCurrent, anbn_sequence, eta_closed, eta_cusp_pair, random_word
from cuspcurrents.errors import PreconditionError
from cuspcurrents.fuchsian import free_reduce
from cuspcurrents.geom import INF, BoundaryPoint, Geodesic, MoebiusMap
from cuspcurrents.intersect import (
    atom_intersection,
    blowup_lower_bound,
    blowup_table,
    crossing_list,
    gc_lambda_membership,
    in_domain,
    intersection_number,
    oracle_intersection,
    shared_endpoint_pairs,
)

R = BoundaryPoint.rational

# counts from the brute-force oracle at word length 14, frozen
ORACLE = {
    ("aabb", "aabb"): 6,
    ("aabb", "ab"): 4,
    ("aabb", "ell"): 4,
    ("ab", "ab"): 2,
    ("ab", "ell"): 2,
    ("ell", "ell"): 0,
}


def atoms_of(P, shift=None):
    shift = shift or MoebiusMap(1, 0, 0, 1)
    return {
        "ab": eta_closed(P, "ab"),
        "aabb": eta_closed(P, "aabb"),
        "ell": eta_cusp_pair(P, shift(R(0)), shift(INF)),
    }


@pytest.fixture(scope="module")
def atoms(P):
    return atoms_of(P)


def hyperbolic_atom(P, rng):
    while True:
        w = free_reduce(random_word(rng, rng.randint(2, 5)))
        try:
            return eta_closed(P, w)
        except PreconditionError:
            continue


# -- values ----------------------------------------------------------------


@pytest.mark.parametrize("pair", sorted(ORACLE))
def test_frozen_values(P, atoms, pair):
    x, y = (atoms[k] for k in pair)
    assert atom_intersection(P, x, y) == ORACLE[pair]
    assert atom_intersection(P, y, x) == ORACLE[pair]


def test_crossing_of_ab_and_imaginary_axis(P, atoms):
    recs = crossing_list(P, atoms["ab"], atoms["ell"])
    # |z + 1| = sqrt 2 meets Re z = 0 at i, inside F
    assert any(abs(r.point - 1j) < 1e-12 for r in recs)
    for r in recs:
        assert in_domain(P, r.point)


def test_cusp_pairs_sharing_an_endpoint_do_not_count(P, atoms):
    other = eta_cusp_pair(P, R(0), R(2, 3))
    assert other != atoms["ell"]
    assert crossing_list(P, atoms["ell"], other) == []
    assert shared_endpoint_pairs(P, atoms["ell"], other)


def test_self_intersection_of_simple_atoms(P, atoms):
    assert atom_intersection(P, atoms["ell"], atoms["ell"]) == 0
    assert oracle_intersection(P, atoms["ell"], atoms["ell"], 10) == 0


def test_power_multiplies(P, atoms):
    sq = eta_closed(P, "abab")
    assert atom_intersection(P, sq, atoms["ell"]) == 2 * ORACLE[("ab", "ell")]
    assert atom_intersection(P, sq, sq) == 4 * ORACLE[("ab", "ab")]


# -- algebra ---------------------------------------------------------------


def test_symmetry_on_random_pairs(P):
    rng = random.Random(8)
    for _ in range(20):
        x, y = hyperbolic_atom(P, rng), hyperbolic_atom(P, rng)
        assert atom_intersection(P, x, y) == atom_intersection(P, y, x)
        assert len(crossing_list(P, x, y)) == len(crossing_list(P, y, x))


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
def test_bilinear(P, atoms, s, t, u):
    mu = DiscreteCurrent([(s, atoms["ab"]), (t, atoms["ell"])])
    nu = DiscreteCurrent.of(atoms["aabb"], u)
    expect = u * (s * ORACLE[("aabb", "ab")] + t * ORACLE[("aabb", "ell")])
    assert intersection_number(P, mu, nu) == pytest.approx(expect, rel=1e-12, abs=1e-12)
    assert intersection_number(P, nu, mu) == pytest.approx(expect, rel=1e-12, abs=1e-12)
    assert intersection_number(P, mu, DiscreteCurrent()) == 0.0


def test_independent_of_fundamental_domain(P):
    for h in [MoebiusMap(1, 1, 0, 1), MoebiusMap(2, 1, 1, 1), MoebiusMap(1, 0, 3, 1),
              MoebiusMap(3, -1, 1, 0), MoebiusMap(1, 2, 1, 3)]:
        Q = P.conjugate(h)
        atoms = atoms_of(Q, h)
        for (k1, k2), v in ORACLE.items():
            assert atom_intersection(Q, atoms[k1], atoms[k2]) == v, (h, k1, k2)


@pytest.mark.parametrize("pair", [("ab", "ell"), ("ab", "ab"), ("aabb", "ell")])
def test_matches_brute_force(P, atoms, pair):
    x, y = (atoms[k] for k in pair)
    assert oracle_intersection(P, x, y, 12) == atom_intersection(P, x, y)


def test_random_atoms_match_brute_force(P):
    rng = random.Random(21)
    for _ in range(4):
        x = hyperbolic_atom(P, rng)
        y = eta_cusp_pair(P, R(0), INF)
        assert oracle_intersection(P, x, y, 12) == atom_intersection(P, x, y), x.word


# -- blow-up ---------------------------------------------------------------


def test_blowup_table(P):
    rows = blowup_table(P, 12)
    assert [r["n"] for r in rows] == list(range(1, 13))
    vals = [r["intersection"] for r in rows]
    assert all(v >= r["n"] + 1 and r["bound_certified"] for v, r in zip(vals, rows))
    assert vals == sorted(vals)
    assert vals == [2 * n for n in range(1, 13)]
    with pytest.raises(PreconditionError):
        blowup_table(P, 0)


def test_blowup_bound_is_exact_geometry(P):
    for n in range(1, 9):
        assert blowup_lower_bound(n)
        assert atom_intersection(P, anbn_sequence(P, n), eta_cusp_pair(P, R(0), INF)) >= n + 1


# -- horoball avoidance ----------------------------------------------------


def test_cusp_pairs_enter_horoballs(P, atoms):
    assert not gc_lambda_membership(P, DiscreteCurrent.of(atoms["ell"]))


def test_ab_clears_horoballs_once_they_shrink(P, atoms):
    mu = DiscreteCurrent.of(atoms["ab"])
    assert not gc_lambda_membership(P, mu)
    # the axis |z + 1| = sqrt 2 peaks at height sqrt 2, the horoball at inf sits at 1 / f
    f = 1 / math.sqrt(2)
    assert gc_lambda_membership(P, mu, P.default_lambda.scaled(f - 1e-4, P))
    assert not gc_lambda_membership(P, mu, P.default_lambda.scaled(f + 1e-4, P))


def test_zero_current_is_a_member(P):
    assert gc_lambda_membership(P, DiscreteCurrent())


def test_in_domain_is_half_open(P):
    assert in_domain(P, -1 + 1j)  # owned vertical wall
    assert not in_domain(P, 1 + 1j)
    assert in_domain(P, -0.5 + 0.5j)  # top of the owned circle |z + 1/2| = 1/2
    assert not in_domain(P, 0.5 + 0.5j)
