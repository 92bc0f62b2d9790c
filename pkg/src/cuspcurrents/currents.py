"""Discrete geodesic currents and their evaluation on boundary boxes.

A discrete current is a finite positive combination of counting currents:
either the lifts of a closed geodesic (given by a hyperbolic word) or the
lifts of a geodesic joining two cusps.  Everything that is counted here is
an exact integer; weights are plain floats.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import DegeneracyError, PreconditionError
from .fuchsian import (
    HorocycleParameter,
    SurfacePreset,
    TruncatedDomain,
    axis,
    axis_tiles_period,
    conjugacy_key,
    cusp_pair_tiles,
    free_reduce,
    is_cusp_point,
    primitive_root,
    tiles_meeting_ball,
    word_inverse,
    word_mul,
)
from .geom import (
    Arc,
    BoundaryPoint,
    Geodesic,
    MoebiusMap,
    PairBox,
    boundary_angle,
    box_theta_min,
    crossing_point,
    hyp_distance,
)

BALL_MARGIN = 1e-7
COLLISION_TOL = 1e-9
SUITE_THETA_MIN = 0.2


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class Atom:
    """One counting current.

    ``kind == "closed"``: ``word`` is the canonical cyclic word of the class
    and ``power`` the exponent over its primitive root, so the atom counts
    every axis translate ``power`` times.  ``kind == "cusp_pair"``: ``word``
    is ``None`` and ``geodesic`` joins two parabolic points.
    """

    kind: str
    geodesic: Geodesic
    word: str | None = None
    power: int = 1

    @property
    def key(self) -> tuple:
        if self.kind == "closed":
            return ("closed", self.word)
        return ("cusp_pair", _pair_key(self.geodesic))

    def __str__(self) -> str:
        if self.kind == "closed":
            return f"eta[{self.word}]"
        return f"eta{{{self.geodesic.x},{self.geodesic.y}}}"


_PAIR_KEYS: dict = {}


def _pair_key(g: Geodesic) -> tuple:
    k = _PAIR_KEYS.get(g)
    if k is None:
        k = (str(g.x), str(g.y))
        _PAIR_KEYS[g] = k
    return k


def eta_closed(preset: SurfacePreset, word: str) -> Atom:
    """Counting current of the closed geodesic of ``word`` (conjugation invariant)."""
    w = free_reduce(word)
    if not w:
        raise PreconditionError("identity has no axis")
    m = preset.matrix(w)
    if abs(m.trace()) <= 2:
        raise PreconditionError(f"word {word!r} is not hyperbolic; its counting current is zero")
    key = conjugacy_key(w)
    _, power = primitive_root(key)
    return Atom("closed", axis(preset, key), key, power)


def eta_cusp_pair(preset: SurfacePreset, p: BoundaryPoint, q: BoundaryPoint) -> Atom:
    """Counting current of the geodesic joining parabolic points ``p`` and ``q``.

    The stored representative is the lexicographically smallest translate
    meeting ``F``, so orbit-equivalent pairs give equal atoms.
    """
    if isinstance(p, str):
        p = BoundaryPoint.parse(p)
    if isinstance(q, str):
        q = BoundaryPoint.parse(q)
    if p == q:
        raise PreconditionError("cusp pair needs two distinct points")
    for x in (p, q):
        if not is_cusp_point(preset, x):
            raise PreconditionError(f"{x} is not a parabolic fixed point of {preset.name}")
    g = Geodesic(p, q)
    reps = _relative_geodesics(preset, Atom("cusp_pair", g))
    best = min(reps, key=lambda r: (str(r.x), str(r.y)))
    return Atom("cusp_pair", best)


def stabilizer_certificate(preset: SurfacePreset, atom: Atom, max_len: int = 12) -> int:
    """Number of words of length ``<= max_len`` mapping the atom's geodesic to
    itself (floats, angular tolerance 1e-9).  ``1`` means only the identity."""
    u1, w1, u2, w2 = atom.geodesic.projective()
    t1, t2 = boundary_angle((u1, w1)), boundary_angle((u2, w2))
    eps = 1e-9
    params = [t1 - eps, t1 + eps, t2 - eps, t2 + eps]
    h1, _ = _kernels.enumerate_hits(
        _kernels.generator_array(preset.generators), [u1, w1, u2, w2], max_len, 1, params
    )
    return int(len(h1))


def _relative_geodesics(preset: SurfacePreset, atom: Atom) -> list[Geodesic]:
    """Every translate of the atom's geodesic that meets the interior of ``F``."""
    ck = ("relgeo", atom.kind, atom.word if atom.kind == "closed" else atom.geodesic)
    hit = preset._cache.get(ck)
    if hit is not None:
        return hit
    if atom.kind == "closed":
        tiles, _ = axis_tiles_period(preset, atom.word)
    else:
        tiles = cusp_pair_tiles(preset, atom.geodesic.x, atom.geodesic.y)
    out = list(dict.fromkeys(preset.matrix(word_inverse(t))(atom.geodesic) for t in tiles))
    preset._cache[ck] = out
    return out


@dataclass
class DiscreteCurrent:
    """Finite positive combination of atoms; equal atoms are merged."""

    atoms: list[tuple[float, Atom]] = field(default_factory=list)

    def __post_init__(self):
        merged: dict = {}
        for w, a in self.atoms:
            w = float(w)
            if not w > 0:
                raise PreconditionError(f"atom weights must be positive, got {w}")
            if a.key in merged:
                merged[a.key] = (merged[a.key][0] + w, merged[a.key][1])
            else:
                merged[a.key] = (w, a)
        self.atoms = list(merged.values())

    @staticmethod
    def of(atom: Atom, weight: float = 1.0) -> "DiscreteCurrent":
        return DiscreteCurrent([(weight, atom)])

    def __add__(self, other: "DiscreteCurrent") -> "DiscreteCurrent":
        return DiscreteCurrent(self.atoms + other.atoms)

    def scaled(self, c: float) -> "DiscreteCurrent":
        if c == 0:
            return DiscreteCurrent()
        return DiscreteCurrent([(c * w, a) for w, a in self.atoms])

    def to_json(self) -> dict:
        out = []
        for w, a in self.atoms:
            if a.kind == "closed":
                out.append({"weight": w, "kind": "closed", "word": a.word})
            else:
                out.append({"weight": w, "kind": "cusp_pair", "p": str(a.geodesic.x), "q": str(a.geodesic.y)})
        return {"atoms": out}

    @staticmethod
    def from_json(preset: SurfacePreset, d: dict | str) -> "DiscreteCurrent":
        if isinstance(d, str):
            d = json.loads(d)
        atoms = []
        for e in d.get("atoms", []):
            try:
                if e["kind"] == "closed":
                    atoms.append((e.get("weight", 1.0), eta_closed(preset, e["word"])))
                elif e["kind"] == "cusp_pair":
                    atoms.append((e.get("weight", 1.0), eta_cusp_pair(preset, str(e["p"]), str(e["q"]))))
                else:
                    raise PreconditionError(f"unknown atom kind {e['kind']!r}")
            except KeyError as exc:
                raise PreconditionError(f"atom entry {e!r} lacks field {exc.args[0]!r}") from None
        return DiscreteCurrent(atoms)


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Window:
    center: complex
    radius: float
    lam: HorocycleParameter | None = None

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius >= 0) or self.center.imag <= 0:
            raise PreconditionError("window needs a point of the upper half-plane and a finite radius >= 0")


def _mats(preset: SurfacePreset, words) -> np.ndarray:
    return np.array([preset.float_matrix(w) for w in words], dtype=np.float64).reshape(-1, 4)


def atoms_in_window(preset: SurfacePreset, atom: Atom, window: Window) -> list[Geodesic]:
    """Orbit geodesics of ``atom`` meeting the closed ball of ``window``.

    Candidates are tile translates of the geodesics meeting ``F``; a float
    kernel prunes them with a small outward margin and survivors are
    transformed exactly, re-checked, and deduplicated by exact endpoints.
    """
    tiles = tiles_meeting_ball(preset, window.center, window.radius)
    rels = _relative_geodesics(preset, atom)
    geos = np.array([r.projective() for r in rels], dtype=np.float64).reshape(-1, 4)
    sinh_r = math.sinh(window.radius) * (1 + BALL_MARGIN) + BALL_MARGIN
    hit = _kernels.translates_meet_ball(_mats(preset, tiles), geos, window.center.real, window.center.imag, sinh_r)
    out: dict[Geodesic, None] = {}
    z = window.center
    for ti, ji in zip(*np.nonzero(hit)):
        g = preset.matrix(tiles[ti])(rels[ji])
        if g in out:
            continue
        if _dist_sinh(z, g) <= math.sinh(window.radius) * (1 + 1e-12) + 1e-12:
            out[g] = None
    return list(out)


def _dist_sinh(z: complex, g: Geodesic) -> float:
    from .geom import _sinh_dist_proj

    return _sinh_dist_proj(z, *g.projective())


# ---------------------------------------------------------------------------
# boxes and bumps


def box_basepoint(box: PairBox) -> complex:
    """Crossing point of the two diagonals of the ideal quadrilateral spanned
    by the box arcs; equivariant under the group action."""
    return crossing_point(Geodesic(box.I.start, box.J.start), Geodesic(box.I.end, box.J.end))


def box_window(box: PairBox, theta_floor: float = 0.05, margin: float = 0.0) -> Window:
    """A ball met by every geodesic of ``box`` (arcs widened by ``margin`` radians)."""
    c = box_basepoint(box)
    theta = box_theta_min(box, c) - 2 * margin
    if theta < theta_floor:
        raise PreconditionError(f"box angular gap {theta:.4g} below floor {theta_floor}")
    return Window(c, math.atanh(math.cos(theta / 2.0)))


def _check_collisions(box: PairBox, geos: list[Geodesic]) -> None:
    ends = box.arc_endpoints()
    fe = [float(e) for e in ends]
    for g in geos:
        for x in g.endpoints:
            for e, f in zip(ends, fe):
                if x == e or (
                    not x.is_infinite and not e.is_infinite and abs(float(x) - f) <= COLLISION_TOL * max(1.0, abs(f))
                ):
                    raise DegeneracyError(
                        f"orbit endpoint {x} sits on box endpoint {e}; perturb the box"
                    )


def count_in_box(preset: SurfacePreset, atom: Atom, box: PairBox) -> int:
    """Orbit geodesics of ``atom`` with one endpoint in each arc (with multiplicity)."""
    geos = atoms_in_window(preset, atom, box_window(box))
    _check_collisions(box, geos)
    return atom.power * sum(1 for g in geos if box.contains(g))


def evaluate_box(preset: SurfacePreset, mu: DiscreteCurrent, box: PairBox) -> float:
    return float(sum(w * count_in_box(preset, a, box) for w, a in mu.atoms))


@dataclass(frozen=True)
class Bump:
    """Product of tents in boundary angle: ``1`` on the core arcs, falling
    linearly to ``0`` over ``margin`` radians outside them."""

    box: PairBox
    margin: float

    def _tent(self, arc: Arc, t: float) -> float:
        s, e = boundary_angle(arc.start), boundary_angle(arc.end)
        length = (e - s) % (2 * math.pi)
        off = (t - s) % (2 * math.pi)
        if off <= length:
            return 1.0
        before = 2 * math.pi - off  # distance back to the start
        after = off - length
        return max(0.0, 1.0 - min(before, after) / self.margin)

    def __call__(self, g: Geodesic) -> float:
        t1, t2 = boundary_angle(g.x), boundary_angle(g.y)
        I, J = self.box.I, self.box.J
        return max(self._tent(I, t1) * self._tent(J, t2), self._tent(I, t2) * self._tent(J, t1))


def evaluate_bump(preset: SurfacePreset, mu: DiscreteCurrent, bump: Bump) -> float:
    if bump.margin <= 0:
        raise PreconditionError("bump margin must be positive")
    win = box_window(bump.box, margin=bump.margin)
    total = 0.0
    for w, a in mu.atoms:
        geos = atoms_in_window(preset, a, win)
        _check_collisions(bump.box, geos)
        total += w * a.power * sum(bump(g) for g in geos)
    return total


def local_finiteness_check(preset: SurfacePreset, mu: DiscreteCurrent, lam: HorocycleParameter | None = None) -> float:
    """``mu(A(K))`` for a ball ``K`` containing the truncated domain."""
    lam = lam or preset.default_lambda
    td = TruncatedDomain(preset, lam)
    z0 = preset.interior_point
    r = 0.0
    for hb in td.horoballs:
        for wall in preset.walls:
            for p in hb.crossings(wall):
                r = max(r, hyp_distance(z0, p))
    win = Window(z0, r)
    return float(sum(w * a.power * len(atoms_in_window(preset, a, win)) for w, a in mu.atoms))


# ---------------------------------------------------------------------------
# sequences


def anbn_sequence(preset: SurfacePreset, n: int) -> Atom:
    """Closed geodesic of ``a^n b^n``; these converge to twice the ``{0, inf}`` current."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return eta_closed(preset, "a" * n + "b" * n)


def cusp_pair_sequence(preset: SurfacePreset, g: str, p: BoundaryPoint, q: BoundaryPoint, n: int) -> Atom:
    """Cusp pair ``{g^-n p, g^n q}``; divided by ``2n`` these converge to ``eta_g``."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    ax = axis(preset, g)
    from .geom import geodesics_cross

    if geodesics_cross(Geodesic(p, q), ax) != "cross":
        raise PreconditionError("the cusp pair must cross the axis of g")
    gn = preset.matrix(free_reduce(g * n))
    return eta_cusp_pair(preset, gn.inverse()(p), gn(q))


# ---------------------------------------------------------------------------
# box suite


def _rat_arc(a, b) -> Arc:
    return Arc(BoundaryPoint.rational(Fraction(a)), BoundaryPoint.rational(Fraction(b)))


BASE_BOXES = (
    ("cusp_0_inf", ("-1/3", "1/3"), ("3", "-3")),
    ("axis_ab", ("-3/5", "-1/5"), ("11/5", "13/5")),
)
SUITE_TRANSLATES = ("BBa", "AAb", "bAb")


def default_box_suite(preset: SurfacePreset) -> list[tuple[str, PairBox]]:
    """Two base boxes around ``{0, inf}`` and ``Ax(ab)`` plus three translates.

    The translating words were drawn once from a seeded generator (see
    :func:`draw_suite_translates`) and frozen.
    """
    base = [(name, PairBox(_rat_arc(*I), _rat_arc(*J))) for name, I, J in BASE_BOXES]
    out = list(base)
    for k, w in enumerate(SUITE_TRANSLATES):
        name, box = base[k % 2]
        out.append((f"{name}@{w}", box.pushed(preset.matrix(w))))
    return out


def draw_suite_translates(preset: SurfacePreset, seed: int = 0, count: int = 3, length: int = 3) -> list[str]:
    """Random reduced words of ``length`` whose pushed boxes keep ``theta_min``
    at least the suite floor."""
    rng = random.Random(seed)
    base = [PairBox(_rat_arc(*I), _rat_arc(*J)) for _, I, J in BASE_BOXES]
    out: list[str] = []
    while len(out) < count:
        w = ""
        while len(w) < length:
            w = word_mul(w, rng.choice("aAbB"))
        box = base[len(out) % 2].pushed(preset.matrix(w))
        if w not in out and box_theta_min(box, box_basepoint(box)) >= SUITE_THETA_MIN:
            out.append(w)
    return out


def box_to_json(box: PairBox) -> list[list[str]]:
    return [[str(box.I.start), str(box.I.end)], [str(box.J.start), str(box.J.end)]]


def box_from_json(d) -> PairBox:
    (i0, i1), (j0, j1) = d
    P = BoundaryPoint.parse
    return PairBox(Arc(P(i0), P(i1)), Arc(P(j0), P(j1)))


def random_word(rng: random.Random, length: int) -> str:
    w = ""
    while len(w) < length:
        w = word_mul(w, rng.choice("aAbB"))
    return w


__all__ = [
    "Atom",
    "DiscreteCurrent",
    "Window",
    "Bump",
    "eta_closed",
    "eta_cusp_pair",
    "atoms_in_window",
    "evaluate_box",
    "evaluate_bump",
    "count_in_box",
    "local_finiteness_check",
    "anbn_sequence",
    "cusp_pair_sequence",
    "default_box_suite",
    "stabilizer_certificate",
    "MoebiusMap",
]
