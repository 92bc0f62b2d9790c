import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspcurrents.errors import PreconditionError
from cuspcurrents.geom import INF, BoundaryPoint, boundary_angle
from cuspcurrents.limitset import convergence_table, hausdorff_to_pair, limit_set_approx, pingpong_intervals

R = BoundaryPoint.rational
PAIR = (R(0), INF)

# depth 8, computed once and frozen
FROZEN = {2: 0.5176380946135454, 4: 0.2520085849655262, 8: 0.12524582508633625, 16: 0.06253056985256102}


def sampled_hausdorff(approx, pair, k=200):
    """Chordal Hausdorff distance estimated from k points per arc."""
    pts = np.array([boundary_angle(p) for p in pair])
    samples = []
    for a in approx.arcs:
        s, e = boundary_angle(a.start), boundary_angle(a.end)
        span = (e - s) % (2 * math.pi)
        samples.append(s + span * np.linspace(0, 1, k))
    t = np.concatenate(samples)
    chord = np.abs(2 * np.sin((t[:, None] - pts[None, :]) / 2))
    return max(chord.min(axis=1).max(), chord.min(axis=0).max())


def test_intervals_for_n_two():
    sys2 = pingpong_intervals(2)
    assert str(sys2.arcs["a"]) == "[2/1, inf]"
    assert str(sys2.arcs["B"]) == "[-1/2, 0/1]"
    with pytest.raises(PreconditionError):
        pingpong_intervals(1)


def test_pingpong_maps_send_arcs_inside():
    for n in (2, 3, 5):
        s = pingpong_intervals(n)
        inv = {"a": "A", "A": "a", "b": "B", "B": "b"}
        for x in "aAbB":
            for y in "aAbB":
                if y == inv[x]:
                    continue
                img = s.maps[x](s.arcs[y])
                assert s.arcs[x].contains(img.start) and s.arcs[x].contains(img.end)


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_arc_counts(depth):
    assert len(limit_set_approx(3, depth).arcs) == 4 * 3 ** (depth - 1)
    with pytest.raises(PreconditionError):
        limit_set_approx(3, 0)


def test_nesting():
    for n in (2, 4):
        coarse, fine = limit_set_approx(n, 3), limit_set_approx(n, 4)
        for arc in fine.arcs:
            assert any(c.contains(arc.start) and c.contains(arc.end) for c in coarse.arcs)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_axis_endpoints_lie_in_every_approximation(n):
    # fixed points of a^n b^n and of b^n a^n: n +- sqrt(n^2 + 1) and -n +- sqrt(n^2 + 1)
    pts = [BoundaryPoint.surd(s * n, e, 1, n * n + 1) for s in (1, -1) for e in (1, -1)]
    for depth in (1, 3, 5):
        approx = limit_set_approx(n, depth)
        assert all(approx.contains(p) for p in pts)


def test_ba_axis_endpoints_converge_to_the_pair():
    # -n + sqrt(n^2 + 1) -> 0 and -n - sqrt(n^2 + 1) -> -inf
    small = [float(BoundaryPoint.surd(-n, 1, 1, n * n + 1)) for n in (2, 4, 8, 16)]
    assert small == sorted(small, reverse=True) and small[-1] < 1 / 31


def test_degenerate_arcs_at_the_pair():
    assert hausdorff_to_pair([(R(0), R(0)), (INF, INF)], PAIR) == 0.0
    with pytest.raises(PreconditionError):
        hausdorff_to_pair([], PAIR)


def test_small_depth_example():
    assert hausdorff_to_pair(limit_set_approx(4, 6), PAIR) < 0.3


@pytest.mark.parametrize("n,depth", [(2, 2), (2, 3), (4, 2), (5, 3)])
def test_matches_sampling(n, depth):
    approx = limit_set_approx(n, depth)
    exact = hausdorff_to_pair(approx, PAIR)
    assert exact == pytest.approx(sampled_hausdorff(approx, PAIR), abs=5e-3)


@settings(max_examples=20)
@given(st.integers(2, 12), st.integers(1, 3))
def test_hausdorff_upper_bounds_samples(n, depth):
    approx = limit_set_approx(n, depth)
    # sampled points lie inside the arcs, so the far part can only be underestimated
    pts = [boundary_angle(p) for p in PAIR]
    exact = hausdorff_to_pair(approx, PAIR)
    for a in approx.arcs:
        s, e = boundary_angle(a.start), boundary_angle(a.end)
        for t in s + ((e - s) % (2 * math.pi)) * np.linspace(0, 1, 17):
            assert min(abs(2 * math.sin((t - p) / 2)) for p in pts) <= exact + 1e-12


def test_convergence_table():
    rows = convergence_table()
    vals = [r["hausdorff"] for r in rows]
    assert [r["n"] for r in rows] == [2, 4, 8, 16]
    for r in rows:
        assert r["hausdorff"] == pytest.approx(FROZEN[r["n"]], abs=1e-12)
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] <= vals[0] / 4
