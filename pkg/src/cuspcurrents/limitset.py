"""Ping-pong approximations of the limit set of ``<a^n, b^n>`` in Gamma(2).

``a^n`` translates by ``2n`` and ``b^n`` is ``z -> z / (2n z + 1)``.  The
four ping-pong arcs are

* ``D(a^n) = [n, inf]`` and ``D(a^-n) = [inf, -n]`` (beyond ``|Re z| = n``),
* ``D(b^n) = [0, 1/n]`` and ``D(b^-n) = [-1/n, 0]`` (inside the isometric
  circles ``|2n z -+ 1| = 1``).

Arcs of the same generator share its parabolic fixed point; arcs of
different generators are disjoint exactly when ``n >= 2``.  Depth ``k``
arcs are ``x_1 ... x_{k-1} D(x_k)`` over reduced words, so the union
shrinks onto the limit set as ``k`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError
from .geom import INF, Arc, BoundaryPoint, MoebiusMap, boundary_angle

TWO_PI = 2.0 * math.pi
LETTERS = ("a", "A", "b", "B")
_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


@dataclass(frozen=True)
class IntervalSystem:
    n: int
    arcs: dict  # letter -> Arc
    maps: dict  # letter -> MoebiusMap for a^n, a^-n, b^n, b^-n


def _power_maps(n: int) -> dict:
    return {
        "a": MoebiusMap(1, 2 * n, 0, 1),
        "A": MoebiusMap(1, -2 * n, 0, 1),
        "b": MoebiusMap(1, 0, 2 * n, 1),
        "B": MoebiusMap(1, 0, -2 * n, 1),
    }


def _arcs_meet(I: Arc, J: Arc) -> bool:
    return I.contains(J.start) or I.contains(J.end) or J.contains(I.start) or J.contains(I.end)


def pingpong_intervals(n: int) -> IntervalSystem:
    if n < 1:
        raise PreconditionError("n must be a positive integer")
    arcs = {
        "a": Arc(BoundaryPoint.rational(n), INF),
        "A": Arc(INF, BoundaryPoint.rational(-n)),
        "b": Arc(BoundaryPoint.rational(0), BoundaryPoint.rational(1, n)),
        "B": Arc(BoundaryPoint.rational(-1, n), BoundaryPoint.rational(0)),
    }
    for x in "aA":
        for y in "bB":
            if _arcs_meet(arcs[x], arcs[y]):
                raise PreconditionError(
                    f"ping-pong arcs D({x}^n)={arcs[x]} and D({y}^n)={arcs[y]} are not disjoint for n={n}"
                )
    return IntervalSystem(n, arcs, _power_maps(n))


@dataclass(frozen=True)
class LimitSetApprox:
    n: int
    depth: int
    arcs: tuple  # tuple[Arc, ...]

    def contains(self, x: BoundaryPoint) -> bool:
        return any(a.contains(x) for a in self.arcs)


def limit_set_approx(n: int, depth: int) -> LimitSetApprox:
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    system = pingpong_intervals(n)
    # level[x] = arcs of words starting with letter x
    level = {x: [system.arcs[x]] for x in LETTERS}
    for _ in range(depth - 1):
        level = {
            x: [system.maps[x](arc) for y in LETTERS if y != _INV[x] for arc in level[y]] for x in LETTERS
        }
    return LimitSetApprox(n, depth, tuple(arc for x in LETTERS for arc in level[x]))


def _in_ccw(t: float, s: float, e: float) -> bool:
    return (t - s) % TWO_PI <= (e - s) % TWO_PI


def _chord(t1: float, t2: float) -> float:
    return abs(2.0 * math.sin((t1 - t2) / 2.0))


def hausdorff_to_pair(approx, pair) -> float:
    """Chordal Hausdorff distance between a union of arcs and a finite point set.

    ``approx`` is a :class:`LimitSetApprox` or an iterable of arcs (an arc
    may be given as a pair of equal points to stand for a single point).
    """
    arcs = approx.arcs if isinstance(approx, LimitSetApprox) else tuple(approx)
    pts = [boundary_angle(p) for p in pair]
    spans = []
    for a in arcs:
        if isinstance(a, Arc):
            spans.append((boundary_angle(a.start), boundary_angle(a.end)))
        else:
            s, e = a
            spans.append((boundary_angle(s), boundary_angle(e)))
    if not spans or not pts:
        raise PreconditionError("both sets must be nonempty")
    ordered = sorted(pts)
    mids = []
    for i, t in enumerate(ordered):
        nxt = ordered[(i + 1) % len(ordered)]
        gap = (nxt - t) % TWO_PI or TWO_PI
        mids.append((t + gap / 2.0) % TWO_PI)

    def to_set(t):
        return min(_chord(t, p) for p in pts)

    far = 0.0
    for s, e in spans:
        cands = [s, e] + [m for m in mids if _in_ccw(m, s, e)]
        far = max(far, max(to_set(t) for t in cands))
    near = 0.0
    for p in pts:
        if any(_in_ccw(p, s, e) for s, e in spans):
            continue
        near = max(near, min(min(_chord(p, s), _chord(p, e)) for s, e in spans))
    return max(far, near)


def convergence_table(ns=(2, 4, 8, 16), depth: int = 8, pair=(BoundaryPoint.rational(0), INF)) -> list[dict]:
    return [{"n": n, "depth": depth, "hausdorff": hausdorff_to_pair(limit_set_approx(n, depth), pair)} for n in ns]
