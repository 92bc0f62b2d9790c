import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspcurrents.errors import PreconditionError
from cuspcurrents.geom import (
    INF,
    Arc,
    BoundaryPoint,
    Geodesic,
    Horoball,
    MoebiusMap,
    PairBox,
    box_theta_min,
    box_window_radius,
    chordal_dist,
    crossing_point,
    dist_point_to_geodesic,
    fixed_points,
    geodesics_cross,
    hyp_distance,
    mob_apply,
    pair_hausdorff,
)

R = BoundaryPoint.rational
SQ2 = math.sqrt(2.0)


def surd(a, b, c, d):
    return BoundaryPoint.surd(a, b, c, d)


# -- boundary points -------------------------------------------------------


def test_canonical_forms_are_syntactic():
    assert surd(2, 2, 2, 2) == surd(1, 1, 1, 2)
    assert surd(-2, -2, -2, 8) == surd(1, 2, 1, 2)  # sqrt(8) = 2 sqrt(2)
    assert surd(1, 1, 1, 4) == R(3)
    assert surd(3, 0, 6, 5) == R(1, 2)
    assert hash(surd(2, 2, 2, 2)) == hash(surd(1, 1, 1, 2))


@pytest.mark.parametrize("text", ["0/1", "-3/7", "inf", "(1+1*sqrt(2))/1", "(-1+3*sqrt(5))/4"])
def test_string_round_trip(text):
    x = BoundaryPoint.parse(text)
    assert BoundaryPoint.parse(str(x)) == x


def test_parse_plain_surd_without_denominator():
    assert BoundaryPoint.parse("1-sqrt(2)") == surd(1, -1, 1, 2)


@given(
    st.integers(-50, 50), st.integers(-9, 9).filter(bool), st.integers(1, 20), st.sampled_from([2, 3, 5, 7, 13]),
    st.integers(-50, 50), st.integers(-9, 9).filter(bool), st.integers(1, 20), st.sampled_from([2, 3, 5, 6, 11]),
)
def test_surd_order_matches_floats(a1, b1, c1, d1, a2, b2, c2, d2):
    x, y = surd(a1, b1, c1, d1), surd(a2, b2, c2, d2)
    fx = (a1 + b1 * math.sqrt(d1)) / c1
    fy = (a2 + b2 * math.sqrt(d2)) / c2
    if abs(fx - fy) > 1e-9:
        assert (x < y) == (fx < fy)
    assert x.compare(x) == 0


# -- Moebius maps ----------------------------------------------------------


def test_mob_apply_examples():
    assert mob_apply(MoebiusMap.identity(), R(2)) == R(2)
    assert mob_apply(MoebiusMap(1, 2, 0, 1), INF) == INF


def test_mob_apply_surd_against_squaring_oracle():
    y = mob_apply(MoebiusMap(1, 0, 2, 1), surd(1, 1, 1, 2))
    # (1 + sqrt2)/(3 + 2 sqrt2) = sqrt2 - 1, the positive root of (v + 1)^2 = 2
    assert y == surd(-1, 1, 1, 2)
    v = float(y)
    assert v > 0 and abs((v + 1) ** 2 - 2) < 1e-12
    lo, hi = Fraction(41421356, 10**8), Fraction(41421357, 10**8)
    assert (lo + 1) ** 2 < 2 < (hi + 1) ** 2 and lo < Fraction(v) < hi


def test_determinant_enforced():
    with pytest.raises(PreconditionError):
        MoebiusMap(1, 1, 1, 1)


words = st.lists(st.sampled_from("aAbB"), min_size=0, max_size=10).map("".join)


@given(words, st.fractions(min_value=-20, max_value=20, max_denominator=50))
def test_inverse_round_trip_is_syntactic(P, w, q):
    m = P.matrix(w)
    x = R(q)
    assert mob_apply(m, mob_apply(m.inverse(), x)) == x
    s = surd(int(q.numerator), 3, int(q.denominator), 7)
    assert mob_apply(m.inverse(), mob_apply(m, s)) == s
    assert (m.inverse() @ m).is_identity()


def test_fixed_points_examples():
    assert fixed_points(MoebiusMap(1, 2, 0, 1)) == (INF,)
    assert fixed_points(MoebiusMap(1, 0, 2, 1)) == (R(0),)
    pts = set(fixed_points(MoebiusMap(5, 2, 2, 1)))
    assert pts == {surd(1, -1, 1, 2), surd(1, 1, 1, 2)}
    for p in pts:  # roots of 2x^2 - 4x - 2
        v = float(p)
        assert abs(2 * v * v - 4 * v - 2) < 1e-12


def test_fixed_points_rejects_elliptic():
    with pytest.raises(PreconditionError):
        fixed_points(MoebiusMap(0, -1, 1, 0))


# -- distances -------------------------------------------------------------


def test_hyp_distance_examples():
    assert hyp_distance(1j, 1j) == 0.0
    assert hyp_distance(1j, 2j) == pytest.approx(math.log(2), rel=1e-12)
    z1, z2 = 1j, 1 + 1j
    closed = math.acosh(1 + abs(z1 - z2) ** 2 / (2 * z1.imag * z2.imag))
    assert hyp_distance(z1, z2) == pytest.approx(closed, rel=1e-12)
    with pytest.raises(PreconditionError):
        hyp_distance(1j, 0.5 + 0j)


points = st.builds(complex, st.floats(-5, 5), st.floats(0.05, 5))


@given(words, points, points)
def test_isometry_invariance(P, w, z1, z2):
    a, b, c, d = P.float_matrix(w)
    f = lambda z: (a * z + b) / (c * z + d)
    assert abs(hyp_distance(f(z1), f(z2)) - hyp_distance(z1, z2)) < 1e-9


# -- crossing --------------------------------------------------------------


def test_geodesics_cross_examples():
    assert geodesics_cross(Geodesic(R(-1), R(1)), Geodesic(R(0), INF)) == "cross"
    assert geodesics_cross(Geodesic(R(0), INF), Geodesic(R(2), INF)) == "share_endpoint"
    ax = Geodesic(surd(1, -1, 1, 2), surd(1, 1, 1, 2))
    assert geodesics_cross(ax, Geodesic(R(0), INF)) == "cross"
    assert geodesics_cross(Geodesic(R(0), R(1)), Geodesic(R(2), R(3))) == "disjoint"


@given(st.lists(st.fractions(-10, 10, max_denominator=9), min_size=4, max_size=4, unique=True), st.booleans())
def test_cross_detection_equals_interleaving(P, pts, with_inf):
    xs = [R(p) for p in pts]
    if with_inf:
        xs[0] = INF
    rank = {x: i for i, x in enumerate(sorted(xs))}
    for perm in itertools.permutations(xs):
        g1, g2 = Geodesic(perm[0], perm[1]), Geodesic(perm[2], perm[3])
        lo, hi = sorted((rank[perm[0]], rank[perm[1]]))
        inside = sum(lo < rank[x] < hi for x in perm[2:])
        assert (geodesics_cross(g1, g2) == "cross") == (inside == 1)


def _on_geodesic(z, g):
    if g.y.is_infinite:
        return abs(z.real - float(g.x))
    c, r = (float(g.x) + float(g.y)) / 2, (float(g.y) - float(g.x)) / 2
    return abs(abs(z - c) - r)


@pytest.mark.parametrize(
    "g1, g2, expected",
    [
        (Geodesic(R(-1), R(1)), Geodesic(R(0), INF), 1j),
        (Geodesic(surd(1, -1, 1, 2), surd(1, 1, 1, 2)), Geodesic(R(0), INF), 1j),
        (Geodesic(R(0), R(2)), Geodesic(R(1), INF), 1 + 1j),
    ],
)
def test_crossing_point_examples(g1, g2, expected):
    z = crossing_point(g1, g2)
    assert abs(z - expected) < 1e-12
    assert _on_geodesic(z, g1) < 1e-10 and _on_geodesic(z, g2) < 1e-10


def test_crossing_point_requires_crossing():
    with pytest.raises(PreconditionError):
        crossing_point(Geodesic(R(0), R(1)), Geodesic(R(2), R(3)))


# -- boundary metrics ------------------------------------------------------


def _cayley(x):
    if x.is_infinite:
        return 1 + 0j
    v = float(x)
    return (v - 1j) / (v + 1j)


def test_chordal_examples():
    assert chordal_dist(R(0), R(0)) == 0.0
    assert chordal_dist(R(0), INF) == pytest.approx(2.0, abs=1e-15)
    assert chordal_dist(R(0), R(1)) == pytest.approx(SQ2, abs=1e-15)


def test_pair_hausdorff_examples():
    s = Geodesic(R(0), INF)
    assert pair_hausdorff(s, s) == 0.0
    t = Geodesic(R(0), R(1))
    A, B = [_cayley(x) for x in s.endpoints], [_cayley(x) for x in t.endpoints]
    brute = max(max(min(abs(a - b) for b in B) for a in A), max(min(abs(a - b) for a in A) for b in B))
    assert pair_hausdorff(s, t) == pytest.approx(brute, abs=1e-14)
    assert pair_hausdorff(s, Geodesic(R(1), INF)) == pytest.approx(SQ2, abs=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_chordal_is_cayley_distance(seed):
    rng = random.Random(seed)
    x, y = R(Fraction(rng.randint(-99, 99), rng.randint(1, 9))), R(Fraction(rng.randint(-99, 99), rng.randint(1, 9)))
    assert abs(chordal_dist(x, y) - abs(_cayley(x) - _cayley(y))) < 1e-12


geos = st.lists(st.fractions(-6, 6, max_denominator=7), min_size=2, max_size=2, unique=True).map(
    lambda p: Geodesic(R(p[0]), R(p[1]))
)


@given(geos, geos, geos)
def test_pair_hausdorff_metric_axioms(a, b, c):
    dab, dbc, dac = pair_hausdorff(a, b), pair_hausdorff(b, c), pair_hausdorff(a, c)
    assert dab == pytest.approx(pair_hausdorff(b, a), abs=1e-15)
    assert (dab == 0) == (a == b)
    assert dac <= dab + dbc + 1e-12


# -- boxes -----------------------------------------------------------------


def test_box_window_radius_examples():
    box = PairBox(Arc(R(-1), R(0)), Arc(R(1), INF))
    assert box_theta_min(box) == pytest.approx(math.pi / 2, abs=1e-12)
    assert box_window_radius(box) == pytest.approx(math.atanh(SQ2 / 2), abs=1e-12)
    assert box_window_radius(box) == pytest.approx(0.881373587, abs=1e-9)


def test_box_radius_zero_for_antipodal_gap():
    # arcs of width ~0 at 0 and inf: theta_min -> pi, R -> 0
    box = PairBox(Arc(R(-1, 10**6), R(1, 10**6)), Arc(R(10**6), R(-(10**6))))
    assert box_window_radius(box) < 1e-5


def test_thin_gap_rejected():
    box = PairBox(Arc(R(0), R(1)), Arc(R(101, 100), R(-1, 100)))
    with pytest.raises(PreconditionError):
        box_window_radius(box)


def test_overlapping_box_rejected():
    with pytest.raises(PreconditionError):
        PairBox(Arc(R(0), R(2)), Arc(R(1), R(3)))


def test_box_window_radius_soundness():
    rng = random.Random(7)
    box = PairBox(Arc(R(-1, 2), R(1, 3)), Arc(R(2), R(-4)))
    Rr = box_window_radius(box)

    def sample(arc):
        a = float(arc.start)
        b = float(arc.end) if not arc.end.is_infinite else math.inf
        if a < b:
            return R(Fraction(rng.uniform(a, b)).limit_denominator(10**6))
        # arc through infinity
        t = rng.uniform(-1, 1)
        if t == 0:
            return INF
        v = a + 1 / t if t > 0 else b + 1 / t
        return R(Fraction(v).limit_denominator(10**6))

    checked = 0
    while checked < 500:
        x, y = sample(box.I), sample(box.J)
        if not (box.I.contains(x) and box.J.contains(y)):
            continue
        assert dist_point_to_geodesic(1j, Geodesic(x, y)) <= Rr + 1e-9
        checked += 1


def test_horoball_size_positive():
    with pytest.raises(PreconditionError):
        Horoball(INF, 0.0)
