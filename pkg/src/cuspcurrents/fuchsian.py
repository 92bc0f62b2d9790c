"""Free Fuchsian groups with an ideal fundamental polygon.

A :class:`SurfacePreset` carries a free basis of Moebius maps together with
an ideal polygon ``F`` whose sides are paired by the basis.  Group elements
are freely reduced words over ``a, A, b, B`` (``A`` is the inverse of ``a``);
a word ``t`` also names the tile ``t F``.  Because the side pairings form a
basis, the dual graph of the tessellation is the Cayley tree of the group,
which the tracing and enumeration routines below rely on.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .errors import DegeneracyError, PreconditionError
from .geom import (
    INF,
    Arc,
    BoundaryPoint,
    Geodesic,
    Horoball,
    MoebiusMap,
    crossing_point,
    fixed_points,
)

WALL_TOL = 1e-12
LOCATE_CAP = 10_000
TRACE_CAP = 100_000

_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


# ---------------------------------------------------------------------------
# words


def _tokens(letters) -> list[str]:
    if isinstance(letters, str):
        s = letters.replace("⁻¹", "'").replace("^-1", "'").replace(" ", "")
        out = []
        for ch in s:
            if ch == "'":
                if not out:
                    raise PreconditionError(f"dangling inverse mark in {letters!r}")
                out[-1] = _INV[out[-1]]
            elif ch in _INV:
                out.append(ch)
            else:
                raise PreconditionError(f"unknown letter {ch!r} in {letters!r}")
        return out
    return [t if t in _INV else _tokens(t)[0] for t in letters]


def free_reduce(letters) -> str:
    """Freely reduce a word; accepts ``"aAb"``, ``"a a⁻¹ b"`` or a token list."""
    stack: list[str] = []
    for t in _tokens(letters):
        if stack and stack[-1] == _INV[t]:
            stack.pop()
        else:
            stack.append(t)
    return "".join(stack)


def word_inverse(w: str) -> str:
    return "".join(_INV[c] for c in reversed(w))


def word_mul(*words: str) -> str:
    out: list[str] = []
    for w in words:
        for t in w:
            if out and out[-1] == _INV[t]:
                out.pop()
            else:
                out.append(t)
    return "".join(out)


def cyclic_reduce(w: str) -> tuple[str, str]:
    """Return ``(u, c)`` with ``w == u c u^-1`` and ``c`` cyclically reduced."""
    w = free_reduce(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == _INV[w[j]]:
        i += 1
        j -= 1
    return w[:i], w[i : j + 1]


def primitive_root(w: str) -> tuple[str, int]:
    """Cyclically reduced ``w == r^k`` with ``r`` not a proper power."""
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p], n // p
    return w, 1


def conjugacy_key(w: str) -> str:
    """Canonical representative of the unoriented conjugacy class of ``w``."""
    _, c = cyclic_reduce(w)
    if not c:
        return ""
    cands = [c, word_inverse(c)]
    return min(x[i:] + x[:i] for x in cands for i in range(len(x)))


def tile_key(w: str) -> tuple[int, str]:
    return (len(w), w)


# ---------------------------------------------------------------------------
# presets


@dataclass(frozen=True)
class GroupElement:
    word: str
    matrix: MoebiusMap

    def __str__(self) -> str:
        return self.word or "id"


@dataclass(frozen=True)
class HorocycleParameter:
    """One horoball per ideal vertex of ``F``: a height for ``inf`` and a
    Euclidean diameter for finite vertices."""

    sizes: tuple[float, ...]

    def scaled(self, factor: float, preset: "SurfacePreset") -> "HorocycleParameter":
        """Shrink (``factor < 1``) every horoball; heights at ``inf`` grow."""
        return HorocycleParameter(
            tuple(s / factor if v.is_infinite else s * factor for s, v in zip(self.sizes, preset.vertices))
        )


@dataclass(frozen=True)
class EdgeRef:
    """An edge of the truncated tessellation.

    ``kind`` is ``"w"`` for a wall (``index`` = side of ``F``, always an
    owned side after canonicalization) or ``"h"`` for a horocyclic edge
    (``index`` = ideal vertex of ``F``).
    """

    tile: str
    kind: str
    index: int

    def translated(self, g: str) -> "EdgeRef":
        return EdgeRef(word_mul(g, self.tile), self.kind, self.index)

    def __str__(self) -> str:
        return f"{self.tile or 'id'}:{self.kind}{self.index}"


@dataclass
class SurfacePreset:
    """Generators, ideal polygon and side pairing of a cusped surface.

    ``vertices`` are listed counterclockwise; side ``i`` joins ``vertices[i]``
    to ``vertices[i+1]`` and the tile across it is ``side_letters[i] F``.
    ``owned[i]`` marks the sides kept in the half-open fundamental domain.
    """

    name: str
    generators: dict[str, MoebiusMap]
    vertices: tuple[BoundaryPoint, ...]
    side_letters: tuple[str, ...]
    owned: tuple[bool, ...]
    cusp_words: dict[int, str]
    default_lambda: HorocycleParameter
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        k = len(self.vertices)
        if k < 4 or len(self.side_letters) != k or len(self.owned) != k:
            raise PreconditionError("preset needs an ideal polygon with >= 4 sides")

    # -- algebra ----------------------------------------------------------

    def matrix(self, word: str) -> MoebiusMap:
        m = self._cache.get(word)
        if m is None:
            if word == "":
                m = MoebiusMap.identity()
            elif len(word) == 1:
                g = self.generators[word.lower()]
                m = g if word.islower() else g.inverse()
            else:
                half = len(word) // 2
                m = self.matrix(word[:half]) @ self.matrix(word[half:])
            if len(self._cache) < 200_000:
                self._cache[word] = m
        return m

    def element(self, letters) -> GroupElement:
        w = free_reduce(letters)
        return GroupElement(w, self.matrix(w))

    def float_matrix(self, word: str) -> tuple[float, float, float, float]:
        return self.matrix(word).as_floats()

    # -- polygon data -------------------------------------------------------

    @cached_property
    def walls(self) -> tuple[Geodesic, ...]:
        k = len(self.vertices)
        return tuple(Geodesic(self.vertices[i], self.vertices[(i + 1) % k]) for i in range(k))

    @cached_property
    def side_arcs(self) -> tuple[Arc, ...]:
        k = len(self.vertices)
        return tuple(Arc(self.vertices[i], self.vertices[(i + 1) % k]) for i in range(k))

    @cached_property
    def partner(self) -> tuple[int, ...]:
        return tuple(self.side_letters.index(_INV[l]) for l in self.side_letters)

    @cached_property
    def _wall_proj(self) -> list[tuple[float, float, float, float, float]]:
        ref = self.interior_point
        out = []
        for w in self.walls:
            u1, w1, u2, w2 = w.projective()
            sig = 1.0 if _wall_fn(ref, u1, w1, u2, w2) > 0 else -1.0
            out.append((u1, w1, u2, w2, sig))
        return out

    @cached_property
    def interior_point(self) -> complex:
        v = self.vertices
        return crossing_point(Geodesic(v[0], v[2]), Geodesic(v[1], v[3]))

    def vertex_index(self, x: BoundaryPoint) -> int | None:
        try:
            return self.vertices.index(x)
        except ValueError:
            return None

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": {k: [str(e) for e in m.entries] for k, m in self.generators.items()},
            "vertices": [str(v) for v in self.vertices],
            "side_letters": list(self.side_letters),
            "owned": list(self.owned),
            "cusp_words": {str(k): v for k, v in self.cusp_words.items()},
            "default_lambda": list(self.default_lambda.sizes),
        }

    @staticmethod
    def from_json(d: dict) -> "SurfacePreset":
        return SurfacePreset(
            name=d["name"],
            generators={k: MoebiusMap(*(Fraction(e) for e in v)) for k, v in d["generators"].items()},
            vertices=tuple(BoundaryPoint.parse(v) for v in d["vertices"]),
            side_letters=tuple(d["side_letters"]),
            owned=tuple(d["owned"]),
            cusp_words={int(k): v for k, v in d["cusp_words"].items()},
            default_lambda=HorocycleParameter(tuple(d["default_lambda"])),
        )

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]

    # -- conjugation ----------------------------------------------------------

    def conjugate(self, h: MoebiusMap, name: str | None = None) -> "SurfacePreset":
        """The same surface with fundamental domain ``h F`` and basis ``h g h^-1``."""
        hi = h.inverse()
        verts = tuple(h(v) for v in self.vertices)
        lam = HorocycleParameter(
            tuple(
                horoball_image(h, _vertex_horoball(v, s)).size
                for v, s in zip(self.vertices, self.default_lambda.sizes)
            )
        )
        return SurfacePreset(
            name=name or f"{self.name}^h",
            generators={k: h @ g @ hi for k, g in self.generators.items()},
            vertices=verts,
            side_letters=self.side_letters,
            owned=self.owned,
            cusp_words=dict(self.cusp_words),
            default_lambda=lam,
        )


def _wall_fn(z: complex, u1: float, w1: float, u2: float, w2: float) -> float:
    x, y = z.real, z.imag
    num = w1 * w2 * (x * x + y * y) - (u1 * w2 + u2 * w1) * x + u1 * u2
    return num / (abs(u1 * w2 - u2 * w1) * y)


def preset_gamma2() -> SurfacePreset:
    """The level-2 principal congruence subgroup: a thrice-punctured sphere."""
    P = BoundaryPoint.rational
    return SurfacePreset(
        name="gamma2",
        generators={"a": MoebiusMap(1, 2, 0, 1), "b": MoebiusMap(1, 0, 2, 1)},
        vertices=(P(-1), P(0), P(1), INF),
        # sides: |z+1/2|=1/2, |z-1/2|=1/2, Re z=1, Re z=-1
        side_letters=("B", "b", "a", "A"),
        owned=(True, False, False, True),
        cusp_words={0: "Ba", 1: "b", 2: "aB", 3: "a"},
        default_lambda=HorocycleParameter((0.5, 0.5, 0.5, 1.0)),
    )


PRESETS = {"gamma2": preset_gamma2}


def get_preset(name: str) -> SurfacePreset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise PreconditionError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def pingpong_certificate(preset: SurfacePreset) -> dict:
    """Check the side-pairing conditions that make ``F`` a fundamental polygon.

    Each letter must carry its partner side exactly onto its own side and
    send ``F`` across that side; each listed cusp word must be parabolic and
    fix its vertex.  Raises on failure, returns a summary on success.
    """
    for i, letter in enumerate(preset.side_letters):
        m = preset.matrix(letter)
        j = preset.partner[i]
        if m(preset.walls[j]) != preset.walls[i]:
            raise PreconditionError(f"letter {letter} does not pair side {j} with side {i}")
        z = m(preset.interior_point)
        if side_values(preset, z)[i] >= 0:
            raise PreconditionError(f"letter {letter} does not map F across side {i}")
        if preset.owned[i] == preset.owned[j]:
            raise PreconditionError(f"sides {i} and {j} must have opposite ownership")
    for vi, w in preset.cusp_words.items():
        m = preset.matrix(w)
        if abs(m.trace()) != 2 or m(preset.vertices[vi]) != preset.vertices[vi]:
            raise PreconditionError(f"cusp word {w} is not parabolic at vertex {vi}")
    return {"sides": len(preset.vertices), "pairings": list(preset.side_letters), "ok": True}


# ---------------------------------------------------------------------------
# point location and tiles


def side_values(preset: SurfacePreset, z: complex) -> list[float]:
    """Signed ``sinh`` of the distance from ``z`` to each side; positive on
    the side of ``F``."""
    return [sig * _wall_fn(z, u1, w1, u2, w2) for (u1, w1, u2, w2, sig) in preset._wall_proj]


def _apply_float(m: tuple[float, float, float, float], z: complex) -> complex:
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def _inverse_float(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def locate(preset: SurfacePreset, z: complex) -> GroupElement:
    """Tile owning ``z``: returns ``g`` with ``g^-1 z`` in the half-open ``F``."""
    if z.imag <= 0:
        raise PreconditionError("point must lie in the upper half-plane")
    word = ""
    w = z
    for _ in range(LOCATE_CAP):
        vals = side_values(preset, w)
        move = None
        worst = 0.0
        for i, s in enumerate(vals):
            if s < -WALL_TOL or (abs(s) <= WALL_TOL and not preset.owned[i]):
                if move is None or s < worst:
                    move, worst = i, s
        if move is None:
            return preset.element(word)
        letter = preset.side_letters[move]
        w = _apply_float(preset.float_matrix(_INV[letter]), w)
        word = word_mul(word, letter)
    raise DegeneracyError(f"point location did not terminate for {z}")


def dist_to_tile(preset: SurfacePreset, word: str, z: complex) -> float:
    zz = _apply_float(_inverse_float(preset.float_matrix(word)), z)
    vals = side_values(preset, zz)
    if min(vals) >= 0:
        return 0.0
    return min(math.asinh(abs(s)) for s in vals)


def tiles_meeting_ball(preset: SurfacePreset, center: complex, R: float, tol: float = 1e-9) -> list[str]:
    """All tiles ``h`` with ``d(center, h F) <= R``, by BFS over side adjacency."""
    if R < 0:
        raise PreconditionError("radius must be nonnegative")
    start = locate(preset, center).word
    seen = {start}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for letter in preset.side_letters:
            n = word_mul(t, letter)
            if n in seen:
                continue
            if dist_to_tile(preset, n, center) <= R + tol:
                seen.add(n)
                queue.append(n)
    return sorted(seen, key=tile_key)


# ---------------------------------------------------------------------------
# exact geodesic/polygon combinatorics


def meets_interior(preset: SurfacePreset, g: Geodesic) -> bool:
    """Exact test: does ``g`` pass through the open polygon ``F``?"""
    for arc in preset.side_arcs:
        if arc.contains(g.x) and arc.contains(g.y):
            return False
    return True


def is_wall(preset: SurfacePreset, g: Geodesic) -> bool:
    return g in preset.walls


def exit_side(preset: SurfacePreset, y: BoundaryPoint) -> int | None:
    """Side of ``F`` separating ``F`` from ``y``; ``None`` if ``y`` is a vertex."""
    if preset.vertex_index(y) is not None:
        return None
    for i, arc in enumerate(preset.side_arcs):
        if arc.contains_open(y):
            return i
    raise AssertionError("boundary point outside every side arc")


def crossed_sides(preset: SurfacePreset, g: Geodesic) -> list[int]:
    """Sides of ``F`` crossed transversally by ``g``."""
    out = []
    for i, arc in enumerate(preset.side_arcs):
        if arc.contains_open(g.x) != arc.contains_open(g.y):
            ends = (arc.start, arc.end)
            if g.x not in ends and g.y not in ends:
                out.append(i)
    return out


@dataclass(frozen=True)
class Step:
    """One tile visited by a geodesic: ``rel`` is the geodesic seen from the tile."""

    tile: str
    rel: Geodesic
    exit: int | None  # side crossed toward the walk target, None at a cusp tail


def walk(preset: SurfacePreset, tile: str, g: Geodesic, toward: BoundaryPoint, cap: int = TRACE_CAP) -> Iterator[Step]:
    """Visit the tiles met by ``g`` from ``tile`` toward the endpoint ``toward``.

    ``g`` is in global coordinates and must meet the interior of ``tile F``.
    The iterator stops at a cusp tail; it is infinite for non-cusp targets.
    """
    rel = preset.matrix(word_inverse(tile))(g)
    target = preset.matrix(word_inverse(tile))(toward)
    for _ in range(cap):
        i = exit_side(preset, target)
        yield Step(tile, rel, i)
        if i is None:
            return
        letter = preset.side_letters[i]
        inv = preset.matrix(_INV[letter])
        rel = inv(rel)
        target = inv(target)
        tile = word_mul(tile, letter)
    raise DegeneracyError("geodesic walk exceeded its step cap")


def start_tile(preset: SurfacePreset, g: Geodesic) -> str:
    """A tile whose interior ``g`` meets (rejects wall-orbit geodesics)."""
    if g.y.is_infinite:
        z = complex(float(g.x), 1.0)
    else:
        c, r = (float(g.x) + float(g.y)) / 2, (float(g.y) - float(g.x)) / 2
        z = complex(c, r)
    t = locate(preset, z).word
    cands = [t] + [word_mul(t, l) for l in preset.side_letters]
    for c in cands:
        rel = preset.matrix(word_inverse(c))(g)
        if is_wall(preset, rel):
            raise DegeneracyError(f"geodesic {g} lies on a wall orbit")
        if meets_interior(preset, rel):
            return c
    # fall back to a short exact walk from the identity toward the geodesic
    raise DegeneracyError(f"could not find a tile met by {g}")


@dataclass
class Trace:
    """Tiles and crossed edges of a geodesic, ordered from ``x`` to ``y``.

    For a periodic geodesic only one period is listed and ``holonomy`` is the
    word translating the period onto the next one.
    """

    geodesic: Geodesic
    steps: list[Step]
    edges: list[EdgeRef]
    ends: tuple[str, str]
    holonomy: str | None = None

    @property
    def tiles(self) -> list[str]:
        return [s.tile for s in self.steps]


def canonical_wall(preset: SurfacePreset, tile: str, side: int) -> EdgeRef:
    if preset.owned[side]:
        return EdgeRef(tile, "w", side)
    return EdgeRef(word_mul(tile, preset.side_letters[side]), "w", preset.partner[side])


def trace_geodesic(preset: SurfacePreset, g: Geodesic, cap: int = TRACE_CAP) -> Trace:
    t0 = start_tile(preset, g)
    fwd: list[Step] = []
    seen: dict[Geodesic, int] = {}
    holonomy = None
    for st in walk(preset, t0, g, g.y, cap):
        if st.rel in seen:
            j = seen[st.rel]
            holonomy = word_mul(st.tile, word_inverse(fwd[j].tile))
            fwd = fwd[j:]
            break
        seen[st.rel] = len(fwd)
        fwd.append(st)
    if holonomy is not None:
        steps = fwd
        ends = ("periodic", "periodic")
    else:
        back = []
        for st in walk(preset, t0, g, g.x, cap):
            back.append(st)
        if back and back[-1].exit is not None:
            raise DegeneracyError("mixed cusp/periodic ends are not supported")
        # reverse the backward walk; exits there point toward x
        steps = [Step(s.tile, s.rel, None) for s in reversed(back[1:])] + fwd
        ends = ("cusp", "cusp")
    edges = []
    for a, b in zip(steps, steps[1:]):
        for i, l in enumerate(preset.side_letters):
            if word_mul(a.tile, l) == b.tile:
                edges.append(canonical_wall(preset, a.tile, i))
                break
    if holonomy is not None and steps:
        i = steps[-1].exit
        edges.append(canonical_wall(preset, steps[-1].tile, i))
    return Trace(g, steps, edges, ends, holonomy)


def axis(preset: SurfacePreset, word: str) -> Geodesic:
    m = preset.matrix(free_reduce(word))
    if abs(m.trace()) <= 2:
        raise PreconditionError(f"word {word!r} is not hyperbolic (trace {m.trace()})")
    x, y = fixed_points(m)
    return Geodesic(x, y)


def axis_tiles_period(preset: SurfacePreset, word: str) -> tuple[list[str], str]:
    """One ``<g>``-period of tiles crossed by ``Ax(g)`` and the period holonomy."""
    tr = trace_geodesic(preset, axis(preset, word))
    return tr.tiles, tr.holonomy


def is_cusp_point(preset: SurfacePreset, x: BoundaryPoint, cap: int = 20_000) -> bool:
    """Exact test for membership in the orbit of the ideal vertices."""
    if not x.is_rational and not x.is_infinite:
        return False
    if preset.vertex_index(x) is not None:
        return True
    tile = ""
    target = x
    for _ in range(cap):
        i = exit_side(preset, target)
        if i is None:
            return True
        letter = preset.side_letters[i]
        target = preset.matrix(_INV[letter])(target)
        tile = word_mul(tile, letter)
    return False


def cusp_pair_tiles(preset: SurfacePreset, p: BoundaryPoint, q: BoundaryPoint) -> list[str]:
    for x in (p, q):
        if not is_cusp_point(preset, x):
            raise PreconditionError(f"{x} is not a parabolic fixed point of {preset.name}")
    tr = trace_geodesic(preset, Geodesic(p, q))
    return tr.tiles


# ---------------------------------------------------------------------------
# horoballs


def _vertex_horoball(v: BoundaryPoint, size: float) -> Horoball:
    return Horoball(v, size)


def horoball_image(m: MoebiusMap, hb: Horoball) -> Horoball:
    """Image of a horoball under ``m`` (base exact, size in floats)."""
    if hb.base.is_infinite:
        k = MoebiusMap.identity()
        H = hb.size
    else:
        v = hb.base.as_fraction()
        k = MoebiusMap(v, -1, 1, 0)
        H = 1.0 / hb.size
    a, _, c, _ = (m @ k).entries
    if c == 0:
        return Horoball(INF, float(a) ** 2 * H)
    return Horoball(BoundaryPoint.rational(Fraction(a) / Fraction(c)), 1.0 / (H * float(c) ** 2))


def vertex_horoball(preset: SurfacePreset, lam: HorocycleParameter, vertex: int, tile: str = "") -> Horoball:
    hb = Horoball(preset.vertices[vertex], lam.sizes[vertex])
    return hb if tile == "" else horoball_image(preset.matrix(tile), hb)


def horoballs_disjoint(h1: Horoball, h2: Horoball, tol: float = 1e-12) -> bool:
    if h1.base == h2.base:
        return abs(h1.size - h2.size) <= tol * max(1.0, h1.size)
    if h1.base.is_infinite or h2.base.is_infinite:
        fin = h2 if h1.base.is_infinite else h1
        inf = h1 if h1.base.is_infinite else h2
        return fin.size <= inf.size + tol
    x1, x2 = float(h1.base), float(h2.base)
    r1, r2 = h1.size / 2, h2.size / 2
    return math.hypot(x1 - x2, r1 - r2) >= r1 + r2 - tol


def validate_horocycle_parameter(preset: SurfacePreset, lam: HorocycleParameter, radius: int = 3) -> None:
    """Check that horoballs at the vertices of all tiles in a word ball are
    pairwise disjoint and consistent at shared bases."""
    if len(lam.sizes) != len(preset.vertices) or min(lam.sizes) <= 0:
        raise PreconditionError("horocycle parameter needs one positive size per vertex")
    balls: dict[BoundaryPoint, Horoball] = {}
    for t in words_up_to(radius):
        for i in range(len(preset.vertices)):
            hb = vertex_horoball(preset, lam, i, t)
            prev = balls.get(hb.base)
            if prev is not None and not horoballs_disjoint(prev, hb):
                raise PreconditionError(f"horocycle parameter is not equivariant at {hb.base}")
            balls[hb.base] = hb
    items = list(balls.values())
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if not horoballs_disjoint(items[i], items[j]):
                raise PreconditionError(f"horoballs {items[i]} and {items[j]} overlap")


def words_up_to(length: int) -> list[str]:
    out = [""]
    frontier = [""]
    for _ in range(length):
        nxt = []
        for w in frontier:
            for l in "aAbB":
                if not w or w[-1] != _INV[l]:
                    nxt.append(w + l)
        out.extend(nxt)
        frontier = nxt
    return out


@dataclass(frozen=True)
class TruncatedDomain:
    """``F`` cut along the horocycles of ``lam``."""

    preset: SurfacePreset
    lam: HorocycleParameter

    @cached_property
    def horoballs(self) -> tuple[Horoball, ...]:
        return tuple(vertex_horoball(self.preset, self.lam, i) for i in range(len(self.preset.vertices)))

    def in_horoball(self, z: complex, tol: float = 0.0) -> int | None:
        for i, hb in enumerate(self.horoballs):
            if hb.contains(z, tol):
                return i
        return None

    def contains(self, z: complex) -> bool:
        return min(side_values(self.preset, z)) >= -WALL_TOL and self.in_horoball(z) is None
