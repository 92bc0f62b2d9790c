"""Upper half-plane primitives.

Two arithmetic tiers live here.  Boundary points and Moebius maps are exact:
points of the real projective line are rationals, ``inf`` or real quadratic
surds ``(a + b*sqrt(D))/c``, and group matrices have rational entries.  Plane
geometry (distances, crossing points, horoball tests) is double precision and
only feeds tolerance-based decisions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .errors import DegeneracyError, PreconditionError

__all__ = [
    "BoundaryPoint",
    "INF",
    "MoebiusMap",
    "Geodesic",
    "Arc",
    "PairBox",
    "Horoball",
    "mob_apply",
    "hyp_distance",
    "fixed_points",
    "geodesics_cross",
    "crossing_point",
    "chordal_dist",
    "pair_hausdorff",
    "box_window_radius",
    "dist_point_to_geodesic",
    "boundary_angle",
    "DEFAULT_THETA_FLOOR",
]

DEFAULT_THETA_FLOOR = 0.05
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# integer helpers


@lru_cache(maxsize=4096)
def _square_split(n: int) -> tuple[int, int]:
    """Return ``(s, f)`` with ``n == s*s*f`` and ``f`` squarefree."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    s, f = 1, 1
    m = n
    p = 2
    bound = 10_000
    while p <= bound and p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                f *= p
        p += 1 if p == 2 else 2
    if m > 1:
        r = math.isqrt(m)
        if r * r == m:
            s *= r
        elif m < bound**3:
            # every prime factor exceeds ``bound``: m is p, p*q, or p^2
            f *= m
        else:
            from sympy import factorint

            for q, e in factorint(m).items():
                s *= q ** (e // 2)
                if e % 2:
                    f *= q
    return s, f


def _sign_surd(alpha: int, beta: int, d: int) -> int:
    """Exact sign of ``alpha + beta*sqrt(d)`` for ``d`` a positive nonsquare (or 1)."""
    if beta == 0 or d == 0:
        return (alpha > 0) - (alpha < 0)
    if alpha >= 0 and beta >= 0:
        return 1
    if alpha <= 0 and beta <= 0:
        return -1
    t = alpha * alpha - beta * beta * d
    st = (t > 0) - (t < 0)
    return st if alpha > 0 else -st


# ---------------------------------------------------------------------------
# boundary points


@dataclass(frozen=True)
class BoundaryPoint:
    """Exact point of the boundary circle ``R u {inf}``.

    The value is ``(a + b*sqrt(D))/c``.  Rationals have ``b == 0`` and
    ``D == 1``; infinity is the unique point with ``c == 0``.  Instances are
    always canonical, so ``==`` and ``hash`` are syntactic.
    """

    a: int
    b: int
    c: int
    D: int

    # -- construction -----------------------------------------------------

    @staticmethod
    def rational(p, q=1) -> "BoundaryPoint":
        fr = Fraction(p) / Fraction(q)
        return BoundaryPoint(fr.numerator, 0, fr.denominator, 1)

    @staticmethod
    def surd(a: int, b: int, c: int, D: int) -> "BoundaryPoint":
        return _canon(a, b, c, D)

    @staticmethod
    def parse(text: str) -> "BoundaryPoint":
        s = text.replace(" ", "")
        if s in ("inf", "oo", "infinity"):
            return INF
        m = re.fullmatch(r"\(?(-?\d+)([+-]\d*)\*?sqrt\((\d+)\)\)?(?:/(\d+))?", s)
        if m:
            a, bs, d, c = m.groups()
            b = int(bs + "1") if bs in ("+", "-") else int(bs)
            return _canon(int(a), b, int(c or 1), int(d))
        try:
            return BoundaryPoint.rational(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"cannot parse boundary point {text!r}") from exc

    # -- predicates -------------------------------------------------------

    @property
    def is_infinite(self) -> bool:
        return self.c == 0

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational or self.is_infinite:
            raise ValueError(f"{self} is not a finite rational")
        return Fraction(self.a, self.c)

    def __float__(self) -> float:
        if self.is_infinite:
            return math.inf
        if self.b == 0:
            return self.a / self.c
        return (self.a + self.b * math.sqrt(self.D)) / self.c

    def projective(self) -> tuple[float, float]:
        """Float homogeneous coordinates ``(u, w)`` with value ``u/w``."""
        if self.is_infinite:
            return 1.0, 0.0
        if self.b == 0:
            # keep huge numerators and denominators in range together
            if abs(self.a) < 2**1000 and self.c < 2**1000:
                return float(self.a), float(self.c)
            return float(Fraction(self.a, self.c)), 1.0
        return float(self), 1.0

    # -- ordering (inf is the largest element) ---------------------------

    def compare(self, other: "BoundaryPoint") -> int:
        if self == other:
            return 0
        if self.is_infinite:
            return 1
        if other.is_infinite:
            return -1
        p = other.c * self.a - self.c * other.a
        q = other.c * self.b
        r = -self.c * other.b
        if q == 0 or self.D == 1:
            return _sign_surd(p, r, other.D)
        if r == 0 or other.D == 1 or self.D == other.D:
            if self.D == other.D:
                return _sign_surd(p, q + r, self.D)
            return _sign_surd(p, q, self.D)
        sx = _sign_surd(p, q, self.D)
        sy = (r > 0) - (r < 0)
        if sx == 0:
            return sy
        if sx == sy:
            return sx
        # sign(X + Y) = sX * sign(X^2 - Y^2)
        s2 = _sign_surd(p * p + q * q * self.D - r * r * other.D, 2 * p * q, self.D)
        return sx * s2

    def __lt__(self, other: "BoundaryPoint") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "BoundaryPoint") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "BoundaryPoint") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "BoundaryPoint") -> bool:
        return self.compare(other) >= 0

    def __str__(self) -> str:
        if self.is_infinite:
            return "inf"
        if self.b == 0:
            return f"{self.a}/{self.c}"
        sign = "+" if self.b > 0 else "-"
        return f"({self.a}{sign}{abs(self.b)}*sqrt({self.D}))/{self.c}"

    def __repr__(self) -> str:
        return f"BoundaryPoint({self})"


def _canon(a: int, b: int, c: int, D: int) -> BoundaryPoint:
    if c == 0:
        if a == 0 and b == 0:
            raise ValueError("0/0 is not a boundary point")
        return INF
    if b != 0 and D != 1:
        if D <= 0:
            raise ValueError("surd discriminant must be positive")
        s, f = _square_split(D)
        b *= s
        D = f
        if D == 1:
            a, b = a + b, 0
    if b == 0:
        D = 1
    if c < 0:
        a, b, c = -a, -b, -c
    g = math.gcd(math.gcd(a, b), c)
    if g > 1:
        a, b, c = a // g, b // g, c // g
    return BoundaryPoint(a, b, c, D)


INF = BoundaryPoint(1, 0, 0, 1)


def boundary_angle(x: BoundaryPoint | tuple[float, float]) -> float:
    """Angle in ``[0, 2*pi)`` of the Cayley image ``(x - i)/(x + i)``."""
    u, w = x.projective() if isinstance(x, BoundaryPoint) else x
    return (-2.0 * math.atan2(w, u)) % TWO_PI


# ---------------------------------------------------------------------------
# Moebius maps


def _as_rational(v):
    if isinstance(v, int):
        return v
    fr = Fraction(v)
    return fr.numerator if fr.denominator == 1 else fr


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b)/(c z + d)`` with rational entries and ``ad - bc == 1``."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _as_rational(getattr(self, name)))
        if self.a * self.d - self.b * self.c != 1:
            raise PreconditionError(f"determinant of {self.entries} is not 1")

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @staticmethod
    def identity() -> "MoebiusMap":
        return MoebiusMap(1, 0, 0, 1)

    def __matmul__(self, o: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def trace(self):
        return self.a + self.d

    def is_identity(self) -> bool:
        """True for both ``I`` and ``-I``."""
        return self.b == 0 and self.c == 0 and self.a == self.d and abs(self.a) == 1

    def projectively_equal(self, o: "MoebiusMap") -> bool:
        return self.entries == o.entries or self.entries == tuple(-v for v in o.entries)

    def integer_entries(self) -> tuple[int, int, int, int]:
        """Entries scaled by a common denominator (same projective map)."""
        den = 1
        for v in self.entries:
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
        return tuple(int(v * den) for v in self.entries)

    def as_floats(self) -> tuple[float, float, float, float]:
        return tuple(float(v) for v in self.entries)

    def __call__(self, x):
        if isinstance(x, BoundaryPoint):
            return mob_apply(self, x)
        if isinstance(x, Geodesic):
            return Geodesic(mob_apply(self, x.x), mob_apply(self, x.y))
        if isinstance(x, Arc):
            return Arc(mob_apply(self, x.start), mob_apply(self, x.end))
        a, b, c, d = self.as_floats()
        return (a * x + b) / (c * x + d)


def mob_apply(m: MoebiusMap, x: BoundaryPoint) -> BoundaryPoint:
    A, B, C, Dm = m.integer_entries()
    if x.is_infinite:
        return _canon(A, 0, C, 1)
    a, b, c, D = x.a, x.b, x.c, x.D
    n0, n1 = A * a + B * c, A * b
    d0, d1 = C * a + Dm * c, C * b
    if b == 0:
        return _canon(n0, 0, d0, 1)
    den = d0 * d0 - d1 * d1 * D
    return _canon(n0 * d0 - n1 * d1 * D, n1 * d0 - n0 * d1, den, D)


def fixed_points(m: MoebiusMap) -> tuple[BoundaryPoint, ...]:
    """Fixed points on the boundary: two for hyperbolic, one for parabolic maps."""
    if m.is_identity():
        raise PreconditionError("identity has no isolated fixed points")
    t = m.trace()
    if abs(t) < 2:
        raise PreconditionError(f"elliptic element (trace {t}) in a free Fuchsian group")
    A, B, C, Dm = m.integer_entries()
    # C x^2 + (Dm - A) x - B = 0
    if C == 0:
        if A == Dm:
            return (INF,)
        return tuple(sorted((INF, BoundaryPoint.rational(B, Dm - A))))
    disc = (Dm - A) ** 2 + 4 * B * C
    if disc == 0:
        return (BoundaryPoint.rational(A - Dm, 2 * C),)
    r = math.isqrt(disc)
    if r * r == disc:
        pts = (BoundaryPoint.rational(A - Dm - r, 2 * C), BoundaryPoint.rational(A - Dm + r, 2 * C))
    else:
        pts = (_canon(A - Dm, -1, 2 * C, disc), _canon(A - Dm, 1, 2 * C, disc))
    return tuple(sorted(pts))


# ---------------------------------------------------------------------------
# geodesics, arcs, boxes, horoballs


@dataclass(frozen=True)
class Geodesic:
    """Unoriented complete geodesic, stored with ``x < y`` (``inf`` last)."""

    x: BoundaryPoint
    y: BoundaryPoint

    def __post_init__(self):
        c = self.x.compare(self.y)
        if c == 0:
            raise PreconditionError("geodesic endpoints must be distinct")
        if c > 0:
            x, y = self.y, self.x
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)

    @staticmethod
    def parse(p: str, q: str) -> "Geodesic":
        return Geodesic(BoundaryPoint.parse(p), BoundaryPoint.parse(q))

    @property
    def endpoints(self) -> tuple[BoundaryPoint, BoundaryPoint]:
        return (self.x, self.y)

    def projective(self) -> tuple[float, float, float, float]:
        return self.x.projective() + self.y.projective()

    def __str__(self) -> str:
        return f"{{{self.x}, {self.y}}}"


def _strictly_between(lo: BoundaryPoint, hi: BoundaryPoint, z: BoundaryPoint) -> bool:
    return lo < z < hi


def geodesics_cross(g1: Geodesic, g2: Geodesic) -> str:
    """Return ``'cross'``, ``'disjoint'`` or ``'share_endpoint'``."""
    if {g1.x, g1.y} & {g2.x, g2.y}:
        return "share_endpoint"
    inside = _strictly_between(g1.x, g1.y, g2.x) + _strictly_between(g1.x, g1.y, g2.y)
    return "cross" if inside == 1 else "disjoint"


def _circle(g: Geodesic) -> tuple[float, float] | None:
    """Center and radius of a semicircle geodesic, or ``None`` if vertical."""
    if g.y.is_infinite:
        return None
    x, y = float(g.x), float(g.y)
    return (x + y) / 2.0, (y - x) / 2.0


def crossing_point(g1: Geodesic, g2: Geodesic) -> complex:
    if geodesics_cross(g1, g2) != "cross":
        raise PreconditionError(f"{g1} and {g2} do not cross")
    c1, c2 = _circle(g1), _circle(g2)
    if c1 is None and c2 is None:
        raise PreconditionError("two vertical geodesics cannot cross")
    if c1 is None or c2 is None:
        x0 = float(g1.x) if c1 is None else float(g2.x)
        c, r = c2 if c1 is None else c1
        dx = x0 - c
        return complex(x0, math.sqrt(max(r * r - dx * dx, 0.0)))
    (a, r1), (b, r2) = c1, c2
    x = (r1 * r1 - r2 * r2 + b * b - a * a) / (2.0 * (b - a))
    dx = x - a
    return complex(x, math.sqrt(max(r1 * r1 - dx * dx, 0.0)))


@dataclass(frozen=True)
class Arc:
    """Closed boundary arc swept counterclockwise (increasing real part) from
    ``start`` to ``end``."""

    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        if self.start == self.end:
            raise PreconditionError("arc endpoints must be distinct")

    def contains(self, x: BoundaryPoint) -> bool:
        if self.start < self.end:
            return self.start <= x <= self.end
        return x >= self.start or x <= self.end

    def contains_open(self, x: BoundaryPoint) -> bool:
        return self.contains(x) and x != self.start and x != self.end

    def __str__(self) -> str:
        return f"[{self.start}, {self.end}]"


@dataclass(frozen=True)
class PairBox:
    """``Box(I, J)``: unordered pairs with one point in ``I`` and one in ``J``."""

    I: Arc
    J: Arc

    def __post_init__(self):
        I, J = self.I, self.J
        if I.contains(J.start) or I.contains(J.end) or J.contains(I.start) or J.contains(I.end):
            raise PreconditionError(f"box arcs {I} and {J} overlap")

    def contains(self, g: Geodesic) -> bool:
        x, y = g.endpoints
        return (self.I.contains(x) and self.J.contains(y)) or (
            self.I.contains(y) and self.J.contains(x)
        )

    def pushed(self, m: MoebiusMap) -> "PairBox":
        return PairBox(m(self.I), m(self.J))

    def arc_endpoints(self) -> tuple[BoundaryPoint, ...]:
        return (self.I.start, self.I.end, self.J.start, self.J.end)


@dataclass(frozen=True)
class Horoball:
    """Open horoball.  For ``base == inf`` the region ``Im z > size``;
    otherwise the open Euclidean disk tangent at ``base`` with diameter
    ``size``."""

    base: BoundaryPoint
    size: float

    def __post_init__(self):
        if not self.size > 0:
            raise PreconditionError("horoball size must be positive")

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        if self.base.is_infinite:
            return z.imag > self.size + tol
        c = complex(float(self.base), self.size / 2.0)
        return abs(z - c) < self.size / 2.0 - tol

    def meets_geodesic(self, g: Geodesic) -> bool:
        """True when the geodesic enters the open horoball."""
        if self.base in (g.x, g.y):
            return True
        # move the base to infinity with z -> -1/(z - base)
        if self.base.is_infinite:
            cr = _circle(g)
            return cr is None or cr[1] > self.size
        b = float(self.base)
        u = [-1.0 / (float(p) - b) if not p.is_infinite else 0.0 for p in g.endpoints]
        return abs(u[0] - u[1]) / 2.0 > 1.0 / self.size

    def crossings(self, g: Geodesic) -> list[complex]:
        """Points where the geodesic meets the horocycle (0 or 2 points)."""
        if self.base in (g.x, g.y):
            other = g.y if g.x == self.base else g.x
            if self.base.is_infinite:
                return [complex(float(other), self.size)]
            b = float(self.base)
            w = 0.0 if other.is_infinite else -1.0 / (float(other) - b)
            return [b - 1.0 / complex(w, 1.0 / self.size)]
        if self.base.is_infinite:
            cr = _circle(g)
            c, r = cr
            if r <= self.size:
                return []
            dx = math.sqrt(r * r - self.size * self.size)
            return [complex(c - dx, self.size), complex(c + dx, self.size)]
        b = float(self.base)
        u = sorted(-1.0 / (float(p) - b) if not p.is_infinite else 0.0 for p in g.endpoints)
        c, r = (u[0] + u[1]) / 2.0, (u[1] - u[0]) / 2.0
        h = 1.0 / self.size
        if r <= h:
            return []
        dx = math.sqrt(r * r - h * h)
        return [b - 1.0 / complex(c - dx, h), b - 1.0 / complex(c + dx, h)]

    def __str__(self) -> str:
        return f"Horoball({self.base}, {self.size:g})"


# ---------------------------------------------------------------------------
# metric quantities


def hyp_distance(z1: complex, z2: complex) -> float:
    if z1.imag <= 0 or z2.imag <= 0:
        raise PreconditionError("points must lie in the upper half-plane")
    return 2.0 * math.asinh(abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag)))


def _sinh_dist_proj(z: complex, u1: float, w1: float, u2: float, w2: float) -> float:
    x, y = z.real, z.imag
    num = w1 * w2 * (x * x + y * y) - (u1 * w2 + u2 * w1) * x + u1 * u2
    return abs(num) / (abs(u1 * w2 - u2 * w1) * y)


def dist_point_to_geodesic(z: complex, g: Geodesic) -> float:
    if z.imag <= 0:
        raise PreconditionError("point must lie in the upper half-plane")
    return math.asinh(_sinh_dist_proj(z, *g.projective()))


def chordal_dist(x: BoundaryPoint, y: BoundaryPoint) -> float:
    d = boundary_angle(x) - boundary_angle(y)
    return abs(2.0 * math.sin(d / 2.0))


def pair_hausdorff(s1: Geodesic, s2: Geodesic) -> float:
    a, b = s1.endpoints
    c, d = s2.endpoints
    h1 = max(min(chordal_dist(a, c), chordal_dist(a, d)), min(chordal_dist(b, c), chordal_dist(b, d)))
    h2 = max(min(chordal_dist(c, a), chordal_dist(c, b)), min(chordal_dist(d, a), chordal_dist(d, b)))
    return max(h1, h2)


def _ccw(t0: float, t1: float) -> float:
    return (t1 - t0) % TWO_PI


def box_theta_min(box: PairBox, basepoint: complex = 1j) -> float:
    """Smallest angular gap between the two arcs, seen from ``basepoint``."""
    x0, y0 = basepoint.real, basepoint.imag

    def ang(p: BoundaryPoint) -> float:
        u, w = p.projective()
        return boundary_angle(((u - x0 * w) / y0, w))

    gap1 = _ccw(ang(box.I.end), ang(box.J.start))
    gap2 = _ccw(ang(box.J.end), ang(box.I.start))
    return min(gap1, gap2)


def box_window_radius(
    box: PairBox, basepoint: complex = 1j, theta_floor: float = DEFAULT_THETA_FLOOR
) -> float:
    """Radius ``R`` such that every geodesic of ``Box(I, J)`` meets ``B(basepoint, R)``."""
    theta = box_theta_min(box, basepoint)
    if theta < theta_floor:
        raise PreconditionError(f"box angular gap {theta:.4g} below floor {theta_floor}")
    return math.atanh(math.cos(theta / 2.0))


def sorted_points(points: Iterable[BoundaryPoint]) -> list[BoundaryPoint]:
    return sorted(points)
