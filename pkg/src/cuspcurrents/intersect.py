"""Intersection numbers of discrete currents.

For counting currents the intersection number counts pairs of orbit
geodesics, up to the diagonal action, whose crossing point lies in the
half-open fundamental domain.  Such a pair has both members meeting the
interior of ``F``, so the candidates are the finite products of the two
atoms' translate lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .currents import Atom, DiscreteCurrent, _relative_geodesics, anbn_sequence, eta_cusp_pair
from .errors import PreconditionError
from .fuchsian import (
    WALL_TOL,
    HorocycleParameter,
    SurfacePreset,
    TruncatedDomain,
    side_values,
)
from .geom import INF, BoundaryPoint, Geodesic, boundary_angle, crossing_point, geodesics_cross


@dataclass(frozen=True)
class CrossingRecord:
    rep1: Geodesic
    rep2: Geodesic
    point: complex
    tile: str = ""


def in_domain(preset: SurfacePreset, z: complex, tol: float = WALL_TOL) -> bool:
    """Membership in the half-open ``F``: walls count only if owned."""
    for s, owned in zip(side_values(preset, z), preset.owned):
        if s < -tol or (abs(s) <= tol and not owned):
            return False
    return True


def crossing_list(preset: SurfacePreset, atom1: Atom, atom2: Atom) -> list[CrossingRecord]:
    out = []
    for r1 in _relative_geodesics(preset, atom1):
        for r2 in _relative_geodesics(preset, atom2):
            if geodesics_cross(r1, r2) != "cross":
                continue
            z = crossing_point(r1, r2)
            if in_domain(preset, z):
                out.append(CrossingRecord(r1, r2, z))
    return out


def shared_endpoint_pairs(preset: SurfacePreset, atom1: Atom, atom2: Atom) -> list[tuple[Geodesic, Geodesic]]:
    """Asymptotic (non-transverse) candidate pairs, reported but never counted."""
    return [
        (r1, r2)
        for r1 in _relative_geodesics(preset, atom1)
        for r2 in _relative_geodesics(preset, atom2)
        if r1 != r2 and geodesics_cross(r1, r2) == "share_endpoint"
    ]


def atom_intersection(preset: SurfacePreset, atom1: Atom, atom2: Atom) -> int:
    return atom1.power * atom2.power * len(crossing_list(preset, atom1, atom2))


def intersection_number(preset: SurfacePreset, mu: DiscreteCurrent, nu: DiscreteCurrent) -> float:
    total = 0.0
    for w1, a1 in mu.atoms:
        for w2, a2 in nu.atoms:
            total += w1 * w2 * atom_intersection(preset, a1, a2)
    return total


def gc_lambda_membership(preset: SurfacePreset, mu: DiscreteCurrent, lam: HorocycleParameter | None = None) -> bool:
    """Whether every geodesic in the support of ``mu`` avoids the open horoballs."""
    td = TruncatedDomain(preset, lam or preset.default_lambda)
    for _, a in mu.atoms:
        if a.kind == "cusp_pair":
            return False
        for r in _relative_geodesics(preset, a):
            if any(hb.meets_geodesic(r) for hb in td.horoballs):
                return False
    return True


def blowup_lower_bound(n: int) -> bool:
    """Exact check that ``a^-k Ax(a^n b^n)``, ``0 <= k <= n``, all cross ``{0, inf}``."""
    from .fuchsian import axis, preset_gamma2

    P = preset_gamma2()
    ax = axis(P, "a" * n + "b" * n)
    ell = Geodesic(BoundaryPoint.rational(0), INF)
    return all(geodesics_cross(P.matrix("A" * k)(ax), ell) == "cross" for k in range(n + 1))


def blowup_table(preset: SurfacePreset, n_max: int) -> list[dict]:
    """Rows ``n -> i(eta[a^n b^n], eta{0, inf})`` with the ``n + 1`` lower bound."""
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    ell = eta_cusp_pair(preset, BoundaryPoint.rational(0), INF)
    rows = []
    for n in range(1, n_max + 1):
        count = atom_intersection(preset, anbn_sequence(preset, n), ell)
        rows.append({"n": n, "intersection": count, "lower_bound": n + 1, "bound_certified": blowup_lower_bound(n)})
    return rows


# ---------------------------------------------------------------------------
# brute-force cross-check


def _vertex_params(preset: SurfacePreset, tol: float) -> np.ndarray:
    angs = [boundary_angle(v) for v in preset.vertices]
    start = int(np.argmin(angs))
    k = len(angs)
    ordered = [angs[(start + i) % k] for i in range(k)]
    return np.array(ordered + [tol])


def oracle_translates_meeting_domain(
    preset: SurfacePreset, g: Geodesic, max_len: int = 14, tol: float = 1e-9
) -> list[tuple[float, float]]:
    """Endpoint angles of translates ``w g`` (``|w| <= max_len``) meeting the
    interior of ``F``, deduplicated up to ``1e-4`` (float drift along long
    words reaches ~1e-6)."""
    t1, t2 = _kernels.enumerate_hits(
        _kernels.generator_array(preset.generators), g.projective(), max_len, 2, _vertex_params(preset, tol)
    )
    return dedup_angle_pairs(t1, t2)


def dedup_angle_pairs(t1, t2, tol: float = 1e-4) -> list[tuple[float, float]]:
    pairs = sorted((min(a, b), max(a, b)) for a, b in zip(t1, t2))
    out: list[tuple[float, float]] = []
    cluster_start = 0  # first kept pair whose first angle is within tol of the current one
    for p in pairs:
        while cluster_start < len(out) and p[0] - out[cluster_start][0] >= tol:
            cluster_start += 1
        if not any(abs(p[1] - q[1]) < tol for q in out[cluster_start:]):
            out.append(p)
    return out


def _crossing_from_angles(p, q) -> complex | None:
    """Crossing point of two geodesics given by endpoint angles, via chords in
    the Klein model (stable for near-diameters)."""
    a, b = p
    c, d = q
    if (a < c < b) == (a < d < b) or min(abs(x - y) for x in p for y in q) < 1e-9:
        return None
    P1, P2, Q1, Q2 = (complex(math.cos(t), math.sin(t)) for t in (a, b, c, d))
    r, s = P2 - P1, Q2 - Q1
    den = r.real * s.imag - r.imag * s.real
    if den == 0:
        return None
    diff = Q1 - P1
    t = (diff.real * s.imag - diff.imag * s.real) / den
    k = P1 + t * r
    w = k / (1 + math.sqrt(max(0.0, 1 - abs(k) ** 2)))
    return 1j * (1 + w) / (1 - w)


def oracle_intersection(preset: SurfacePreset, atom1: Atom, atom2: Atom, max_len: int = 14) -> int:
    """Crossings in ``F`` between brute-force translate lists of both atoms."""
    l1 = oracle_translates_meeting_domain(preset, atom1.geodesic, max_len)
    l2 = oracle_translates_meeting_domain(preset, atom2.geodesic, max_len)
    count = 0
    for p in l1:
        for q in l2:
            z = _crossing_from_angles(p, q)
            if z is not None and z.imag > 0 and in_domain(preset, z, 1e-9):
                count += 1
    return atom1.power * atom2.power * count
