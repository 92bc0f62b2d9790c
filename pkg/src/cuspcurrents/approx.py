"""Approximating a discrete current by a rational one through round-paths.

Pipeline:

1. :func:`roundpaths_of_current` records, for every orbit geodesic meeting
   the truncated domain ``F_lambda``, the sequence of edges it crosses inside
   the Cayley ball ``B(id, r)`` and accumulates the weights ``mu_bar``.
2. :func:`matching_system` lists the consistency equations between the
   balls around ``id`` and around each generator.
3. :func:`rationalize` replaces ``mu_bar`` by integers ``theta`` over a
   common denominator ``M`` that satisfy the same equations exactly.
4. :func:`build_gamma` matches copies of round-paths across adjacent balls
   and walks the resulting graph modulo the group.
5. :func:`assemble` turns each component into a closed geodesic (periodic
   component) or a cusp-to-cusp geodesic (finite component), and checks a
   piecewise-geodesic witness for it.

:func:`densify` runs all of it and writes a verification report.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .currents import (
    DiscreteCurrent,
    Window,
    _relative_geodesics,
    atoms_in_window,
    box_window,
    default_box_suite,
    eta_closed,
    eta_cusp_pair,
    evaluate_box,
)
from .errors import DegeneracyError, PreconditionError
from .fuchsian import (
    EdgeRef,
    HorocycleParameter,
    SurfacePreset,
    TruncatedDomain,
    canonical_wall,
    side_values,
    tile_key,
    validate_horocycle_parameter,
    vertex_horoball,
    walk,
    word_inverse,
    word_mul,
    words_up_to,
)
from .geom import (
    BoundaryPoint,
    Geodesic,
    MoebiusMap,
    crossing_point,
    geodesics_cross,
    hyp_distance,
    pair_hausdorff,
)

CORNER_TOL = 1e-10
MIN_WEIGHT = 1e-9
DEFAULT_RADIUS = 2
DEFAULT_DELTA0 = 0.05
BEND_MARGIN = 0.01
M_CAP = 10**6

RoundPath = tuple  # tuple[EdgeRef, ...] in canonical orientation


def _ekey(e: EdgeRef) -> tuple:
    return (len(e.tile), e.tile, e.kind, e.index)


def canonical(seq) -> RoundPath:
    seq = tuple(seq)
    rev = seq[::-1]
    return seq if [_ekey(e) for e in seq] <= [_ekey(e) for e in rev] else rev


def edge_tiles(preset: SurfacePreset, e: EdgeRef) -> tuple[str, ...]:
    if e.kind == "h":
        return (e.tile,)
    return (e.tile, word_mul(e.tile, preset.side_letters[e.index]))


def rp_str(p: RoundPath) -> str:
    return "[" + " ".join(str(e) for e in p) + "]"


# ---------------------------------------------------------------------------
# round-path extraction


def _walk_limited(preset: SurfacePreset, g: Geodesic, toward: BoundaryPoint, r: int) -> list[str]:
    out = []
    for st in walk(preset, "", g, toward):
        out.append(st.tile)
        if len(st.tile) > r:
            break
    return out


def _side_to(preset: SurfacePreset, t: str, n: str) -> int:
    for i, l in enumerate(preset.side_letters):
        if word_mul(t, l) == n:
            return i
    raise AssertionError("tiles are not adjacent")


def _param(lx: BoundaryPoint, ly: BoundaryPoint):
    """Monotone parameter along the geodesic oriented from ``lx`` to ``ly``."""
    if ly.is_infinite:
        fx = float(lx)
        return lambda z: abs(z - fx)
    if lx.is_infinite:
        fy = float(ly)
        return lambda z: -abs(z - fy)
    fx, fy = float(lx), float(ly)
    return lambda z: abs(z - fx) / abs(z - fy)


def _in_horoball(td: TruncatedDomain, z: complex, what: str) -> bool:
    inside = False
    for hb in td.horoballs:
        if hb.contains(z, CORNER_TOL):
            if not hb.contains(z, -CORNER_TOL):
                raise DegeneracyError(f"{what} passes through a corner of the truncated domain; perturb lambda")
            inside = True
    return inside


def edge_sequence(preset: SurfacePreset, td: TruncatedDomain, g: Geodesic, r: int) -> list[tuple[EdgeRef, complex]]:
    """Edges of ``B(id, r)`` crossed by ``g`` in order from ``g.x`` to ``g.y``,
    with the crossing points (global coordinates)."""
    back = _walk_limited(preset, g, g.x, r)
    fwd = _walk_limited(preset, g, g.y, r)
    tiles = back[::-1] + fwd[1:]
    events: list[tuple[EdgeRef, complex]] = []
    for k, t in enumerate(tiles):
        if len(t) > r:
            continue
        m = preset.matrix(t)
        mi = m.inverse()
        lx, ly = mi(g.x), mi(g.y)
        lg = Geodesic(lx, ly)
        par = _param(lx, ly)
        local: list[tuple[float, EdgeRef, complex]] = []
        prev = tiles[k - 1] if k > 0 else None
        nxt = tiles[k + 1] if k + 1 < len(tiles) else None
        walls = []
        if prev is not None and len(prev) > r:
            walls.append((_side_to(preset, t, prev), -math.inf))
        if nxt is not None:
            walls.append((_side_to(preset, t, nxt), math.inf))
        for i, order in walls:
            z = crossing_point(lg, preset.walls[i])
            if not _in_horoball(td, z, "geodesic"):
                local.append((order, canonical_wall(preset, t, i), z))
        for j, hb in enumerate(td.horoballs):
            for z in hb.crossings(lg):
                vals = side_values(preset, z)
                lo = min(vals)
                if lo < -CORNER_TOL:
                    continue
                if lo <= CORNER_TOL:
                    raise DegeneracyError("geodesic meets a horocycle on a wall; perturb lambda")
                local.append((par(z), EdgeRef(t, "h", j), z))
        local.sort(key=lambda e: e[0])
        for _, e, z in local:
            events.append((e, m(z)))
    return events


def _id_edges(preset: SurfacePreset) -> set[EdgeRef]:
    k = len(preset.vertices)
    return {canonical_wall(preset, "", i) for i in range(k)} | {EdgeRef("", "h", j) for j in range(k)}


def _adjacent(u: str, v: str) -> bool:
    return len(word_mul(word_inverse(u), v)) <= 1


def split_at_jumps(seq: list[EdgeRef]) -> list[list[EdgeRef]]:
    """Cut between consecutive horocyclic edges of tiles that are neither equal
    nor adjacent (the geodesic travelled deep inside a cusp in between)."""
    pieces = [[]]
    for e in seq:
        cur = pieces[-1]
        if cur and e.kind == "h" and cur[-1].kind == "h" and not _adjacent(cur[-1].tile, e.tile):
            pieces.append([])
        pieces[-1].append(e)
    return [p for p in pieces if p]


def round_path(preset: SurfacePreset, td: TruncatedDomain, g: Geodesic, r: int) -> RoundPath | None:
    """Round-path of ``g`` in ``B(id, r)``, or ``None`` if ``g`` misses ``F_lambda``."""
    seq = [e for e, _ in edge_sequence(preset, td, g, r)]
    ids = _id_edges(preset)
    for piece in split_at_jumps(seq):
        if any(e in ids for e in piece):
            return canonical(piece)
    return None


@dataclass
class WeightTable:
    """``mu_bar`` on the round-paths of ``B(id, r)`` with one realizing
    geodesic per round-path (identity-ball coordinates)."""

    r: int
    lam: HorocycleParameter
    weights: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)
    members: dict = field(default_factory=dict)

    def keys(self) -> list[RoundPath]:
        return sorted(self.weights, key=lambda p: [_ekey(e) for e in p])


def roundpaths_of_current(
    preset: SurfacePreset, mu: DiscreteCurrent, r: int = DEFAULT_RADIUS, lam: HorocycleParameter | None = None
) -> WeightTable:
    if r < 1:
        raise PreconditionError("round-path radius must be >= 1")
    lam = lam or preset.default_lambda
    validate_horocycle_parameter(preset, lam)
    td = TruncatedDomain(preset, lam)
    table = WeightTable(r, lam)
    for w, atom in mu.atoms:
        if w < MIN_WEIGHT:
            continue
        for g in _relative_geodesics(preset, atom):
            p = round_path(preset, td, g, r)
            if p is None:
                continue
            table.weights[p] = table.weights.get(p, 0.0) + w * atom.power
            table.samples.setdefault(p, g)
            table.members.setdefault(p, []).append(g)
    return table


# ---------------------------------------------------------------------------
# matching equations


def _ball_pair(r: int, s: str) -> set[str]:
    si = word_inverse(s)
    return {t for t in words_up_to(r) if len(word_mul(si, t)) <= r}


def restriction(preset: SurfacePreset, p: RoundPath, tiles: set[str]) -> RoundPath:
    return canonical(e for e in p if any(t in tiles for t in edge_tiles(preset, e)))


def _touches(preset: SurfacePreset, p: RoundPath, tile: str) -> bool:
    return any(tile in edge_tiles(preset, e) for e in p)


def matching_system(preset: SurfacePreset, keys: list[RoundPath], r: int) -> list[dict]:
    """One equation per generator ``s`` and restriction class ``J``:
    ``lhs`` indexes round-paths at ``id`` with restriction ``J`` toward ``s``,
    ``rhs`` those whose ``s``-translate has restriction ``J`` from ``s``."""
    eqs = []
    for s in preset.generators:
        both = _ball_pair(r, s)
        both_back = {word_mul(word_inverse(s), t) for t in both}
        lhs: dict = defaultdict(list)
        rhs: dict = defaultdict(list)
        for k, p in enumerate(keys):
            if _touches(preset, p, s):
                lhs[restriction(preset, p, both)].append(k)
            if _touches(preset, p, word_inverse(s)):
                J = restriction(preset, p, both_back)
                rhs[canonical(e.translated(s) for e in J)].append(k)
        for J in sorted(set(lhs) | set(rhs), key=lambda q: [_ekey(e) for e in q]):
            eqs.append({"s": s, "J": J, "lhs": lhs.get(J, []), "rhs": rhs.get(J, [])})
    return eqs


def residuals(eqs: list[dict], values) -> list:
    return [sum(values[i] for i in e["lhs"]) - sum(values[i] for i in e["rhs"]) for e in eqs]


# ---------------------------------------------------------------------------
# rationalization


@dataclass
class IntegerTable:
    keys: list
    theta: list[int]
    M: int
    mu_bar: list[float]
    exact: bool

    @property
    def max_error(self) -> float:
        return max((abs(t / self.M - m) for t, m in zip(self.theta, self.mu_bar)), default=0.0)


def _as_rational(x: float, max_den: int = M_CAP) -> Fraction | None:
    fr = Fraction(x).limit_denominator(max_den)
    return fr if abs(float(fr) - x) <= 1e-12 * max(1.0, abs(x)) else None


def _nullspace_basis(eqs: list[dict], n: int) -> list[list[Fraction]]:
    """Exact rational basis of the solution space of the matching equations."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix

    if not eqs:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    rows = []
    for e in eqs:
        row = [0] * n
        for i in e["lhs"]:
            row[i] += 1
        for i in e["rhs"]:
            row[i] -= 1
        rows.append([QQ(v) for v in row])
    A = DomainMatrix(rows, (len(rows), n), QQ)
    R, pivots = A.rref()
    R = R.to_Matrix()
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            c = R[row, f]
            v[pc] = -Fraction(int(c.p), int(c.q))
        basis.append(v)
    return basis


def rationalize(
    preset: SurfacePreset, table: WeightTable, eps: float | None, m_cap: int = M_CAP
) -> IntegerTable:
    """Integer weights ``theta`` and denominator ``M`` with exact matching.

    ``eps == 0`` (or ``None`` with rational input) demands an exact
    representation ``theta = M * mu_bar``.
    """
    keys = table.keys()
    mu = [table.weights[k] for k in keys]
    n = len(keys)
    if n == 0:
        return IntegerTable([], [], 1, [], True)
    eqs = matching_system(preset, keys, table.r)
    res = residuals(eqs, mu)
    if res and max(abs(x) for x in res) > 1e-9 * max(1.0, max(mu)):
        raise PreconditionError(f"weight table violates the matching equations (residual {max(map(abs, res)):.3g})")
    rats = [_as_rational(x) for x in mu]
    if all(q is not None for q in rats):
        M = reduce(lambda a, b: a * b // math.gcd(a, b), (q.denominator for q in rats), 1)
        if M <= m_cap:
            theta = [int(q * M) for q in rats]
            if all(x == 0 for x in residuals(eqs, theta)):
                return IntegerTable(keys, theta, M, mu, True)
    if eps is None or eps <= 0:
        raise PreconditionError("exact rationalization requested but the weights are not rational")
    basis = _nullspace_basis(eqs, n)
    mu_arr = np.array(mu)
    B = np.array([[float(x) for x in v] for v in basis]).T  # n x d
    # mu lies in the span: recover coefficients by least squares
    coef, *_ = np.linalg.lstsq(B, mu_arr, rcond=None)
    D = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for v in basis for x in v), 1)
    B_int = [[int(x * D) for x in v] for v in basis]
    Bi = np.array(B_int, dtype=np.float64).T
    best = (math.inf, None, None)
    chunk = 4096
    for start in range(1, m_cap + 1, chunk):
        Ms = np.arange(start, min(start + chunk, m_cap + 1), dtype=np.float64)
        K = np.rint(Ms[:, None] * coef[None, :] / D)  # (c, d)
        theta = K @ Bi.T  # (c, n)
        err = np.max(np.abs(theta / Ms[:, None] - mu_arr[None, :]), axis=1)
        err[np.any(theta < 0, axis=1)] = np.inf
        k = int(np.argmin(err))
        if err[k] < best[0]:
            best = (float(err[k]), int(Ms[k]), [int(x) for x in K[k]])
        ok = np.nonzero(err < eps)[0]
        if ok.size:
            k = int(ok[0])
            M = int(Ms[k])
            kk = [int(x) for x in K[k]]
            theta_exact = [sum(kk[j] * B_int[j][i] for j in range(len(kk))) for i in range(n)]
            if any(residuals(eqs, theta_exact)):
                raise AssertionError("integer solution violates the matching equations")
            return IntegerTable(keys, theta_exact, M, mu, False)
    raise DegeneracyError(f"no denominator M <= {m_cap} reaches eps={eps}; best residual {best[0]:.3g} at M={best[1]}")


# ---------------------------------------------------------------------------
# the graph of copies


@dataclass
class Component:
    """One component of the copy graph modulo the group.

    ``nodes`` lists ``(round-path index, copy, position)`` in walk order;
    for a periodic component ``holonomy`` maps the first node's position to
    the position of its repeat.
    """

    nodes: list[tuple[int, int, str]]
    periodic: bool
    holonomy: str | None = None
    links: list[RoundPath] = field(default_factory=list)  # restriction between consecutive nodes (local to the first)
    end_degrees: tuple[int, int] = (0, 0)

    @property
    def half_line(self) -> bool:
        """A walk that stops at a vertex with two neighbours never closes up."""
        return not self.periodic and max(self.end_degrees) > 1


@dataclass
class ComponentGraph:
    keys: list
    theta: list[int]
    components: list[Component]
    max_degree: int
    n_vertices: int
    n_edges: int


def build_gamma(preset: SurfacePreset, it: IntegerTable, r: int) -> ComponentGraph:
    keys = it.keys
    eqs = matching_system(preset, keys, r)
    # node -> list of (edge id, neighbor node, offset word, link restriction local to node)
    adj: dict = defaultdict(list)
    n_edges = 0
    for e in eqs:
        L = [(i, c) for i in sorted(e["lhs"]) for c in range(it.theta[i])]
        R = [(i, c) for i in sorted(e["rhs"]) for c in range(it.theta[i])]
        if len(L) != len(R):
            raise PreconditionError(f"copy counts differ across {e['s']} for {rp_str(e['J'])}")
        s = e["s"]
        Jback = canonical(x.translated(word_inverse(s)) for x in e["J"])
        for u, v in zip(L, R):
            adj[u].append((n_edges, v, s, e["J"]))
            adj[v].append((n_edges, u, word_inverse(s), Jback))
            n_edges += 1
    nodes = [(i, c) for i in range(len(keys)) for c in range(it.theta[i])]
    max_deg = max((len(adj[v]) for v in nodes), default=0)
    if max_deg > 2:
        raise DegeneracyError(f"copy graph has a vertex of degree {max_deg}")
    seen: set = set()
    comps: list[Component] = []
    starts = [v for v in nodes if len(adj[v]) < 2] + [v for v in nodes if len(adj[v]) == 2]
    for v0 in starts:
        if v0 in seen:
            continue
        seen.add(v0)
        comp_nodes = [(v0[0], v0[1], "")]
        links: list = []
        cur, pos, via = v0, "", None
        periodic, holonomy = False, None
        while True:
            nxt = [x for x in adj[cur] if x[0] != via]
            if not nxt:
                break
            eid, node, off, J = nxt[0]
            links.append(canonical(x.translated(pos) for x in J))
            pos = word_mul(pos, off)
            if node == v0:
                periodic, holonomy = True, pos
                break
            if node in seen:
                raise DegeneracyError("copy graph walk revisited a vertex")
            seen.add(node)
            comp_nodes.append((node[0], node[1], pos))
            cur, via = node, eid
        if periodic and not holonomy:
            raise DegeneracyError("closed loop in the copy graph with trivial holonomy")
        degs = (len(adj[v0]), len(adj[cur]))
        comps.append(Component(comp_nodes, periodic, holonomy, links, degs))
    return ComponentGraph(keys, it.theta, comps, max_deg, len(nodes), n_edges)


# ---------------------------------------------------------------------------
# assembling geodesics and witnesses


def _edge_point(preset: SurfacePreset, td: TruncatedDomain, g: Geodesic, e: EdgeRef) -> complex | None:
    """Where the geodesic ``g`` (global) crosses the edge ``e``, if it does."""
    m = preset.matrix(e.tile)
    lg = m.inverse()(g)
    if e.kind == "w":
        if geodesics_cross(lg, preset.walls[e.index]) != "cross":
            return None
        return m(crossing_point(lg, preset.walls[e.index]))
    for z in td.horoballs[e.index].crossings(lg):
        if min(side_values(preset, z)) >= -CORNER_TOL:
            return m(z)
    return None


def _direction(z: complex, w) -> complex:
    """Unit tangent direction at ``z`` toward ``w`` (a point of H or a boundary point)."""
    if isinstance(w, BoundaryPoint):
        if w.is_infinite:
            return 1.0 + 0j
        w = complex(float(w), 0.0)
    phi = (w - z) / (w - z.conjugate())
    return phi / abs(phi)


def interior_angle(prev, z: complex, nxt) -> float:
    """Angle at the bend ``z`` of the path ``prev -> z -> nxt`` (``pi`` when straight)."""
    d1, d2 = _direction(z, prev), _direction(z, nxt)
    return abs(math.atan2((d1 / d2).imag, (d1 / d2).real))


def _tree_dist(u: str, v: str) -> int:
    return len(word_mul(word_inverse(u), v))


def _edge_dist(preset: SurfacePreset, e: EdgeRef, tile: str) -> int:
    return min(_tree_dist(t, tile) for t in edge_tiles(preset, e))


def edge_separation(preset: SurfacePreset, lam: HorocycleParameter, samples: int = 400) -> float:
    """Smallest distance between non-adjacent edges of ``F_lambda`` (sampled,
    so a slight overestimate)."""
    td = TruncatedDomain(preset, lam)
    k = len(preset.vertices)
    pts: dict = {}
    for i, w in enumerate(preset.walls):
        u, v = w.endpoints
        to_wall = _map_axis(u, v)
        ts = np.linspace(-8, 8, 8 * samples)
        zs = [to_wall(1j * math.exp(t)) for t in ts]
        pts[("w", i)] = [z for z in zs if td.in_horoball(z) is None]
    for j, hb in enumerate(td.horoballs):
        if hb.base.is_infinite:
            xs = np.linspace(-50, 50, 40 * samples)
            zs = [complex(x, hb.size) for x in xs]
        else:
            c = complex(float(hb.base), hb.size / 2)
            zs = [c + hb.size / 2 * complex(math.cos(t), math.sin(t)) for t in np.linspace(0, 2 * math.pi, 8 * samples)]
            zs = [z for z in zs if z.imag > 1e-12]
        pts[("h", j)] = [z for z in zs if min(side_values(preset, z)) >= -1e-12]

    def adjacent(e1, e2):
        if e1[0] == e2[0]:
            return e1 == e2
        wi, hj = (e1[1], e2[1]) if e1[0] == "w" else (e2[1], e1[1])
        return hj in (wi, (wi + 1) % k)

    best = math.inf
    names = sorted(pts)
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            if adjacent(names[a], names[b]):
                continue
            A = np.array(pts[names[a]])
            B = np.array(pts[names[b]])
            d = np.abs(A[:, None] - B[None, :]) / (2 * np.sqrt(A.imag[:, None] * B.imag[None, :]))
            best = min(best, 2 * math.asinh(float(d.min())))
    return best


def _map_axis(u: BoundaryPoint, v: BoundaryPoint):
    """Float map sending ``0 -> u`` and ``inf -> v``."""
    if v.is_infinite:
        fu = float(u)
        return lambda z: z + fu
    fv = float(v)
    if u.is_infinite:
        return lambda z: fv - 1.0 / z
    fu = float(u)
    return lambda z: (fv * z + fu) / (z + 1.0)


@dataclass
class Witness:
    bends: list[complex]
    angles: list[float]
    lengths: list[float]

    def passes(self, min_length: float) -> bool:
        ok_angles = all(a > math.pi / 2 + BEND_MARGIN for a in self.angles)
        return ok_angles and all(l >= min_length for l in self.lengths)


def _orient(preset: SurfacePreset, J: RoundPath, toward: str) -> RoundPath:
    if len(J) > 1 and _edge_dist(preset, J[0], toward) < _edge_dist(preset, J[-1], toward):
        return J[::-1]
    return J


def build_witness(
    preset: SurfacePreset, td: TruncatedDomain, lines: list[Geodesic], links: list[RoundPath], tiles: list[str], ends
) -> Witness:
    """Piecewise geodesic through the realizing geodesics ``lines`` in order.

    Consecutive distinct lines are joined at their crossing point, or by a
    segment between their crossings with the first and last edge of the link.
    ``ends`` gives the points the path runs to before the first and after
    the last bend.
    """
    bends: list[complex] = []
    for k in range(len(lines) - 1):
        l1, l2 = lines[k], lines[k + 1]
        if l1 == l2:
            continue
        if geodesics_cross(l1, l2) == "cross":
            bends.append(crossing_point(l1, l2))
            continue
        J = _orient(preset, links[k], tiles[k + 1])
        s = _edge_point(preset, td, l1, J[0])
        t = _edge_point(preset, td, l2, J[-1])
        if s is None or t is None:
            raise DegeneracyError("realizing geodesic misses its link edges")
        bends.extend([s, t])
    if not bends:
        return Witness([], [], [])
    seq = [ends[0]] + bends + [ends[1]]
    angles = [interior_angle(seq[i - 1], seq[i], seq[i + 1]) for i in range(1, len(seq) - 1)]
    lengths = [hyp_distance(bends[i], bends[i + 1]) for i in range(len(bends) - 1)]
    return Witness(bends, angles, lengths)


def _attracting(m: MoebiusMap, x: BoundaryPoint) -> bool:
    a, b, c, d = m.as_floats()
    if x.is_infinite:
        return abs(a) > abs(d)
    return abs(c * float(x) + d) > 1.0


@dataclass
class AssembledLine:
    atom: object
    geodesic: Geodesic
    witness: Witness
    delta: float  # largest pair distance between the line and its round-path samples


def _starts_with(a: tuple, b: tuple) -> bool:
    return a[: len(b)] == b


def merge_sequences(paths: list[RoundPath], links: list[RoundPath]) -> tuple:
    """Edge sequence of a chain of overlapping round-paths, glued along the links."""
    merged = tuple(paths[0])
    for q, J in zip(paths[1:], links):
        if not J:
            raise DegeneracyError("empty link between consecutive round-paths")
        glued = None
        for Jo in (tuple(J), tuple(J)[::-1]):
            for qo in (tuple(q), tuple(q)[::-1]):
                try:
                    i0, j0 = merged.index(Jo[0]), qo.index(Jo[0])
                except ValueError:
                    continue
                n = len(Jo)
                if merged[i0 : i0 + n] != Jo or qo[j0 : j0 + n] != Jo:
                    continue
                mb, ma = merged[:i0], merged[i0 + n :]
                qb, qa = qo[:j0], qo[j0 + n :]
                if not (mb[::-1][: len(qb)] == qb[::-1] or qb[::-1][: len(mb)] == mb[::-1]):
                    continue
                if not (_starts_with(ma, qa) or _starts_with(qa, ma)):
                    continue
                glued = max(mb, qb, key=len) + Jo + max(ma, qa, key=len)
                break
            if glued is not None:
                break
        if glued is None:
            raise DegeneracyError("consecutive round-paths do not glue along their link")
        merged = glued
    return merged


def _cusp_of(preset: SurfacePreset, e: EdgeRef) -> BoundaryPoint:
    if e.kind != "h":
        raise DegeneracyError(f"finite component ends at a wall edge {e}; the matching is invalid")
    return preset.matrix(e.tile)(preset.vertices[e.index])


def assemble(
    preset: SurfacePreset, table: WeightTable, graph: ComponentGraph, td: TruncatedDomain
) -> list[AssembledLine]:
    from .fuchsian import axis

    out = []
    for comp in graph.components:
        paths = [canonical(e.translated(pos) for e in graph.keys[i]) for i, _, pos in comp.nodes]
        lines = [preset.matrix(pos)(table.samples[graph.keys[i]]) for i, _, pos in comp.nodes]
        tiles = [pos for _, _, pos in comp.nodes]
        links = list(comp.links)
        if comp.periodic:
            try:
                atom = eta_closed(preset, comp.holonomy)
            except PreconditionError as exc:
                raise DegeneracyError(f"periodic component has non-hyperbolic holonomy {comp.holonomy}") from exc
            geo = axis(preset, comp.holonomy)
            h = preset.matrix(comp.holonomy)
            lines.append(h(lines[0]))
            tiles.append(comp.holonomy)
            ends = (geo.x, geo.y) if _attracting(h, geo.y) else (geo.y, geo.x)
        else:
            merged = merge_sequences(paths, links)
            e1, e2 = merged[0], merged[-1]
            c1, c2 = _cusp_of(preset, e1), _cusp_of(preset, e2)
            if c1 == c2:
                raise DegeneracyError("finite component returns to the cusp it started from")
            atom = eta_cusp_pair(preset, c1, c2)
            geo = Geodesic(c1, c2)
            ends = (c1, c2)
        wit = build_witness(preset, td, lines, links, tiles, ends)
        delta = max(pair_hausdorff(geo, l) for l in lines)
        out.append(AssembledLine(atom, geo, wit, delta))
    return out


# ---------------------------------------------------------------------------
# disjoint round-paths near the identity and the full pipeline


def select_disjoint_O(preset: SurfacePreset, table: WeightTable, r0: int = 1) -> list[tuple[str, RoundPath]]:
    """Round-paths of the balls around tiles within ``r0`` of the identity,
    keeping a round-path only when none of its geodesics already meets an
    earlier tile (tiles ordered by length then lexicographically)."""
    td = TruncatedDomain(preset, table.lam)
    order = sorted(words_up_to(r0), key=tile_key)
    rank = {h: i for i, h in enumerate(order)}
    kept: set = set()
    for h in order:
        for p in table.keys():
            for rho in table.members.get(p, [table.samples[p]]):
                g = preset.matrix(h)(rho)
                first = h
                for h2 in order[: rank[h]]:
                    try:
                        met = round_path(preset, td, preset.matrix(word_inverse(h2))(g), table.r) is not None
                    except (DegeneracyError, PreconditionError):
                        met = False
                    if met:
                        first = h2
                        break
                if first == h:
                    kept.add((h, p))
                    break
    return sorted(kept, key=lambda hp: (tile_key(hp[0]), [_ekey(e) for e in hp[1]]))


def default_eps(n_selected: int) -> float:
    return 0.05 / (4 * max(1, n_selected))


def densify(
    preset: SurfacePreset,
    mu: DiscreteCurrent,
    r: int = DEFAULT_RADIUS,
    lam: HorocycleParameter | None = None,
    eps: float | None = None,
    delta0: float = DEFAULT_DELTA0,
    boxes=None,
    m_cap: int = M_CAP,
) -> tuple[DiscreteCurrent, dict]:
    """Rational current close to ``mu`` assembled from closed and cusp-to-cusp
    geodesics, with a verification report.

    ``eps=None`` uses the default schedule; ``eps=0`` demands an exact
    representation and fails on irrational weights.
    """
    lam = lam or preset.default_lambda
    table = roundpaths_of_current(preset, mu, r, lam)
    O = select_disjoint_O(preset, table)
    eps_used = default_eps(len(O)) if eps is None else eps
    it = rationalize(preset, table, eps_used, m_cap)
    graph = build_gamma(preset, it, r)
    td = TruncatedDomain(preset, lam)
    lines = assemble(preset, table, graph, td)
    nu = DiscreteCurrent([])
    for ln in lines:
        nu = nu + DiscreteCurrent.of(ln.atom, 1.0 / it.M)
    min_len = (r / 2) * edge_separation(preset, lam)
    eqs = matching_system(preset, it.keys, r)
    boxes = boxes if boxes is not None else default_box_suite(preset)
    box_rows = []
    for name, box in boxes:
        a, b = evaluate_box(preset, mu, box), evaluate_box(preset, nu, box)
        box_rows.append({"box": name, "mu": a, "nu": b, "discrepancy": abs(a - b)})
    angles = [a for ln in lines for a in ln.witness.angles]
    lengths = [l for ln in lines for l in ln.witness.lengths]
    report = {
        "r": r,
        "lambda": list(lam.sizes),
        "eps": eps_used,
        "delta0": delta0,
        "M": it.M,
        "exact": it.exact,
        "n_roundpaths": len(it.keys),
        "n_selected": len(O),
        "table": [
            {"roundpath": rp_str(k), "mu_bar": m, "theta": t, "theta_over_M": t / it.M}
            for k, m, t in zip(it.keys, it.mu_bar, it.theta)
        ],
        "max_weight_error": it.max_error,
        "weight_error_ok": it.max_error == 0 if it.exact else it.max_error < eps_used,
        "matching_equations": len(eqs),
        "matching_residual_mu": max((abs(x) for x in residuals(eqs, it.mu_bar)), default=0.0),
        "matching_residual_theta": max((abs(x) for x in residuals(eqs, it.theta)), default=0),
        "graph": {
            "vertices": graph.n_vertices,
            "edges": graph.n_edges,
            "max_degree": graph.max_degree,
            "periodic_components": sum(c.periodic for c in graph.components),
            "finite_components": sum(not c.periodic for c in graph.components),
            "half_lines": sum(c.half_line for c in graph.components),
        },
        "witness": {
            "min_bend_angle": min(angles) if angles else math.pi,
            "min_segment_length": min(lengths) if lengths else math.inf,
            "length_threshold": min_len,
            "all_pass": all(ln.witness.passes(min_len) for ln in lines),
        },
        "delta0_max": max((ln.delta for ln in lines), default=0.0),
        "delta0_ok": all(ln.delta <= delta0 for ln in lines),
        "boxes": box_rows,
        "max_discrepancy": max((b["discrepancy"] for b in box_rows), default=0.0),
        "atoms": [{"atom": str(a), "weight": w} for w, a in nu.atoms],
    }
    return nu, report
