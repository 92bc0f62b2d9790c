"""Float hot loops, compiled with numba when available.

Set ``CUSPCURRENTS_DISABLE_NUMBA=1`` to force the pure-numpy versions.
Both backends accept the same words; returned angles agree up to float
drift along long words (about 1e-6 at length 14).
``benchmarks/bench_kernels.py`` times them against each other.

Matrices are float arrays of shape ``(n, 4)`` holding ``(a, b, c, d)``;
geodesics are projective endpoint pairs ``(u1, w1, u2, w2)`` with the
point ``u/w`` (``w == 0`` is infinity).
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("CUSPCURRENTS_DISABLE_NUMBA", "").strip() not in ("", "0", "false", "False")

try:  # pragma: no cover - depends on the environment
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

TWO_PI = 2.0 * math.pi

# letters in the order a, A, b, B; inverse of letter k is k ^ 1
LETTERS = "aAbB"


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def generator_array(gens: dict) -> np.ndarray:
    """``(4, 4)`` float array of the matrices for ``a, A, b, B``."""
    a = gens["a"]
    b = gens["b"]
    rows = [a.as_floats(), a.inverse().as_floats(), b.as_floats(), b.inverse().as_floats()]
    return np.array(rows, dtype=np.float64)


# ---------------------------------------------------------------------------
# numpy reference implementations


def _sinh_dist_np(x, y, u1, w1, u2, w2):
    num = np.abs(w1 * w2 * (x * x + y * y) - (u1 * w2 + u2 * w1) * x + u1 * u2)
    return num / (np.abs(u1 * w2 - u2 * w1) * y)


def _angles_np(u, w):
    return np.mod(-2.0 * np.arctan2(w, u), TWO_PI)


def _in_arc_np(t, s, e):
    return np.mod(t - s, TWO_PI) <= np.mod(e - s, TWO_PI)


def translates_meet_ball_np(mats, geos, x, y, sinh_r):
    """Boolean ``(T, J)``: does ``mats[t]`` applied to ``geos[j]`` meet the ball?"""
    a, b, c, d = (mats[:, k][:, None] for k in range(4))
    u1, w1, u2, w2 = (geos[:, k][None, :] for k in range(4))
    U1 = a * u1 + b * w1
    W1 = c * u1 + d * w1
    U2 = a * u2 + b * w2
    W2 = c * u2 + d * w2
    return _sinh_dist_np(x, y, U1, W1, U2, W2) <= sinh_r


def _image_angles_np(mats, geo):
    u1, w1, u2, w2 = geo
    a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]
    return _angles_np(a * u1 + b * w1, c * u1 + d * w1), _angles_np(a * u2 + b * w2, c * u2 + d * w2)


def _predicate_np(mats, geo, mode, params):
    t1, t2 = _image_angles_np(mats, geo)
    if mode == 0:
        u1, w1, u2, w2 = geo
        a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]
        s = _sinh_dist_np(
            params[0], params[1], a * u1 + b * w1, c * u1 + d * w1, a * u2 + b * w2, c * u2 + d * w2
        )
        ok = s <= params[2]
    elif mode == 1:
        i0, i1, j0, j1 = params[0], params[1], params[2], params[3]
        ok = (_in_arc_np(t1, i0, i1) & _in_arc_np(t2, j0, j1)) | (_in_arc_np(t2, i0, i1) & _in_arc_np(t1, j0, j1))
    else:
        ok = np.ones(t1.shape, dtype=bool)
        k = params.shape[0] - 1
        tol = params[k]
        for i in range(k):
            s, e = params[i] - tol, params[(i + 1) % k] + tol
            ok &= ~(_in_arc_np(t1, s, e) & _in_arc_np(t2, s, e))
    return ok, t1, t2


def _words_exact_np(gens, length):
    """Matrices and last letters of all reduced words of exactly ``length``."""
    mats = np.eye(2).reshape(1, 4)
    last = np.array([-1])
    for _ in range(length):
        new_m, new_l = [], []
        for k in range(4):
            keep = last != (k ^ 1)
            m = mats[keep]
            g = gens[k]
            new_m.append(
                np.stack(
                    [
                        m[:, 0] * g[0] + m[:, 1] * g[2],
                        m[:, 0] * g[1] + m[:, 1] * g[3],
                        m[:, 2] * g[0] + m[:, 3] * g[2],
                        m[:, 2] * g[1] + m[:, 3] * g[3],
                    ],
                    axis=1,
                )
            )
            new_l.append(np.full(m.shape[0], k))
        mats = np.concatenate(new_m)
        last = np.concatenate(new_l)
    return mats, last


def _first_letters_np(gens, length):
    """Like :func:`_words_exact_np` but also records the first letter."""
    mats = np.eye(2).reshape(1, 4)
    first = np.array([-1])
    last = np.array([-1])
    for step in range(length):
        nm, nf, nl = [], [], []
        for k in range(4):
            keep = last != (k ^ 1)
            m = mats[keep]
            g = gens[k]
            nm.append(
                np.stack(
                    [
                        m[:, 0] * g[0] + m[:, 1] * g[2],
                        m[:, 0] * g[1] + m[:, 1] * g[3],
                        m[:, 2] * g[0] + m[:, 3] * g[2],
                        m[:, 2] * g[1] + m[:, 3] * g[3],
                    ],
                    axis=1,
                )
            )
            nf.append(np.full(m.shape[0], k) if step == 0 else first[keep])
            nl.append(np.full(m.shape[0], k))
        mats, first, last = np.concatenate(nm), np.concatenate(nf), np.concatenate(nl)
    return mats, first, last


def enumerate_hits_np(gens, geo, max_len, mode, params):
    """Endpoint angles of ``w * geo`` over reduced words ``|w| <= max_len``
    passing the predicate.

    mode 0: meets the ball ``params = (x, y, sinh R)``;
    mode 1: lies in the box ``params = (I0, I1, J0, J1)`` (angles);
    mode 2: meets the interior of the ideal polygon whose vertex angles,
    in counterclockwise order, are ``params[:-1]`` (``params[-1]`` = tolerance).
    """
    gens = np.asarray(gens, dtype=np.float64)
    geo = np.asarray(geo, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    half = max_len // 2
    out1, out2 = [], []
    # short words directly
    for n in range(0, min(max_len, half) + 1):
        m, _ = _words_exact_np(gens, n)
        ok, t1, t2 = _predicate_np(m, geo, mode, params)
        out1.append(t1[ok])
        out2.append(t2[ok])
    if max_len > half:
        pre, pre_last = _words_exact_np(gens, half)
        for n in range(1, max_len - half + 1):
            suf, suf_first, _ = _first_letters_np(gens, n)
            for k in range(4):
                ps = pre[pre_last != (k ^ 1)]
                ss = suf[suf_first == k]
                if ps.shape[0] == 0 or ss.shape[0] == 0:
                    continue
                # products ps @ ss for every pair, chunked over the prefix axis
                for lo in range(0, ps.shape[0], 512):
                    p = ps[lo : lo + 512]
                    a = p[:, 0:1] * ss[None, :, 0] + p[:, 1:2] * ss[None, :, 2]
                    b = p[:, 0:1] * ss[None, :, 1] + p[:, 1:2] * ss[None, :, 3]
                    c = p[:, 2:3] * ss[None, :, 0] + p[:, 3:4] * ss[None, :, 2]
                    d = p[:, 2:3] * ss[None, :, 1] + p[:, 3:4] * ss[None, :, 3]
                    m = np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)
                    ok, t1, t2 = _predicate_np(m, geo, mode, params)
                    out1.append(t1[ok])
                    out2.append(t2[ok])
    return np.concatenate(out1), np.concatenate(out2)


# ---------------------------------------------------------------------------
# numba versions

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _sinh_dist_nb(x, y, u1, w1, u2, w2):
        num = abs(w1 * w2 * (x * x + y * y) - (u1 * w2 + u2 * w1) * x + u1 * u2)
        return num / (abs(u1 * w2 - u2 * w1) * y)

    @njit(cache=True, inline="always")
    def _angle_nb(u, w):
        t = -2.0 * math.atan2(w, u)
        t = t % TWO_PI
        return t

    @njit(cache=True)
    def translates_meet_ball_nb(mats, geos, x, y, sinh_r):
        T = mats.shape[0]
        J = geos.shape[0]
        out = np.zeros((T, J), dtype=np.bool_)
        for t in range(T):
            a, b, c, d = mats[t, 0], mats[t, 1], mats[t, 2], mats[t, 3]
            for j in range(J):
                u1, w1, u2, w2 = geos[j, 0], geos[j, 1], geos[j, 2], geos[j, 3]
                s = _sinh_dist_nb(x, y, a * u1 + b * w1, c * u1 + d * w1, a * u2 + b * w2, c * u2 + d * w2)
                out[t, j] = s <= sinh_r
        return out

    @njit(cache=True)
    def _words_nb(gens, n):
        """All reduced words of length <= n: matrices, lengths, first and last letters."""
        total = 1
        layer = 1
        for k in range(1, n + 1):
            layer = 4 if k == 1 else layer * 3
            total += layer
        mats = np.empty((total, 4))
        length = np.zeros(total, dtype=np.int64)
        first = np.full(total, -1, dtype=np.int64)
        last = np.full(total, -1, dtype=np.int64)
        mats[0, 0] = 1.0
        mats[0, 1] = 0.0
        mats[0, 2] = 0.0
        mats[0, 3] = 1.0
        lo, hi, top = 0, 1, 1
        for k in range(1, n + 1):
            for i in range(lo, hi):
                for g in range(4):
                    if last[i] >= 0 and g == (last[i] ^ 1):
                        continue
                    mats[top, 0] = mats[i, 0] * gens[g, 0] + mats[i, 1] * gens[g, 2]
                    mats[top, 1] = mats[i, 0] * gens[g, 1] + mats[i, 1] * gens[g, 3]
                    mats[top, 2] = mats[i, 2] * gens[g, 0] + mats[i, 3] * gens[g, 2]
                    mats[top, 3] = mats[i, 2] * gens[g, 1] + mats[i, 3] * gens[g, 3]
                    length[top] = k
                    first[top] = g if k == 1 else first[i]
                    last[top] = g
                    top += 1
            lo, hi = hi, top
        return mats, length, first, last

    @njit(cache=True, inline="always")
    def _in_arc_xy_nb(px, py, arcs, k):
        """Is the circle point in direction ``(px, py)`` on arc ``arcs[k]``?

        A row holds the unit vectors of the arc ends and a flag for arcs longer
        than pi, which are tested as the complement of the short arc."""
        sx, sy, ex, ey = arcs[k, 0], arcs[k, 1], arcs[k, 2], arcs[k, 3]
        if arcs[k, 4] == 0.0:
            return sx * py - sy * px >= 0.0 and px * ey - py * ex >= 0.0
        return not (ex * py - ey * px > 0.0 and px * sy - py * sx > 0.0)

    @njit(cache=True, inline="always")
    def _arcs_accept_nb(U1, W1, U2, W2, mode, arcs):
        # (U : W) sits at angle -2 atan2(W, U), direction (U^2 - W^2, -2 U W)
        p1x, p1y = U1 * U1 - W1 * W1, -2.0 * U1 * W1
        p2x, p2y = U2 * U2 - W2 * W2, -2.0 * U2 * W2
        if mode == 2:
            for k in range(arcs.shape[0]):
                if _in_arc_xy_nb(p1x, p1y, arcs, k) and _in_arc_xy_nb(p2x, p2y, arcs, k):
                    return False
            return True
        return (_in_arc_xy_nb(p1x, p1y, arcs, 0) and _in_arc_xy_nb(p2x, p2y, arcs, 1)) or (
            _in_arc_xy_nb(p2x, p2y, arcs, 0) and _in_arc_xy_nb(p1x, p1y, arcs, 1)
        )

    @njit(cache=True)
    def _split_words_nb(gens, geo, max_len):
        # A word of length > h splits as prefix (length h) times suffix; the
        # suffix images of the geodesic are computed once and every prefix is
        # applied to them in a tight loop.
        h = max_len // 2
        pm, plen, pfirst, plast = _words_nb(gens, h)
        sm, slen, sfirst, slast = _words_nb(gens, max_len - h)
        ns = sm.shape[0]
        sv = np.empty((ns, 4))
        for j in range(ns):
            sv[j, 0] = sm[j, 0] * geo[0] + sm[j, 1] * geo[1]
            sv[j, 1] = sm[j, 2] * geo[0] + sm[j, 3] * geo[1]
            sv[j, 2] = sm[j, 0] * geo[2] + sm[j, 1] * geo[3]
            sv[j, 3] = sm[j, 2] * geo[2] + sm[j, 3] * geo[3]
        return h, pm, plen, plast, sv, slen, sfirst

    @njit(cache=True)
    def _hits_ball_nb(gens, geo, max_len, params, out):
        """Mode 0 scan.  Hits go into the caller's buffer; the return value is
        the total count, which may exceed its size."""
        h, pm, plen, plast, sv, slen, sfirst = _split_words_nb(gens, geo, max_len)
        x, y, sr = params[0], params[1], params[2]
        q = x * x + y * y
        cap = out.shape[0]
        n_out = 0
        for i in range(pm.shape[0]):
            a, b, c, d = pm[i, 0], pm[i, 1], pm[i, 2], pm[i, 3]
            full = plen[i] == h
            inv = plast[i] ^ 1
            for j in range(sv.shape[0]):
                # non-empty suffixes only extend full prefixes, reduced
                if slen[j] > 0 and (not full or sfirst[j] == inv):
                    continue
                V1, X1, V2, X2 = sv[j, 0], sv[j, 1], sv[j, 2], sv[j, 3]
                U1, W1 = a * V1 + b * X1, c * V1 + d * X1
                U2, W2 = a * V2 + b * X2, c * V2 + d * X2
                num = abs(W1 * W2 * q - (U1 * W2 + U2 * W1) * x + U1 * U2)
                if num <= sr * abs(U1 * W2 - U2 * W1) * y:
                    if n_out < cap:
                        out[n_out, 0] = _angle_nb(U1, W1)
                        out[n_out, 1] = _angle_nb(U2, W2)
                    n_out += 1
        return n_out

    @njit(cache=True)
    def _hits_arcs_nb(gens, geo, max_len, mode, arcs, out):
        """Modes 1 and 2, same buffer protocol as :func:`_hits_ball_nb`."""
        h, pm, plen, plast, sv, slen, sfirst = _split_words_nb(gens, geo, max_len)
        cap = out.shape[0]
        n_out = 0
        for i in range(pm.shape[0]):
            a, b, c, d = pm[i, 0], pm[i, 1], pm[i, 2], pm[i, 3]
            full = plen[i] == h
            inv = plast[i] ^ 1
            for j in range(sv.shape[0]):
                if slen[j] > 0 and (not full or sfirst[j] == inv):
                    continue
                V1, X1, V2, X2 = sv[j, 0], sv[j, 1], sv[j, 2], sv[j, 3]
                U1, W1 = a * V1 + b * X1, c * V1 + d * X1
                U2, W2 = a * V2 + b * X2, c * V2 + d * X2
                if _arcs_accept_nb(U1, W1, U2, W2, mode, arcs):
                    if n_out < cap:
                        out[n_out, 0] = _angle_nb(U1, W1)
                        out[n_out, 1] = _angle_nb(U2, W2)
                    n_out += 1
        return n_out

    def enumerate_hits_nb(gens, geo, max_len, mode, params):
        arcs = _arc_table(mode, params)
        out = np.empty((4096, 2))
        for _ in range(2):
            if mode == 0:
                n = _hits_ball_nb(gens, geo, max_len, params, out)
            else:
                n = _hits_arcs_nb(gens, geo, max_len, mode, arcs, out)
            if n <= out.shape[0]:
                break
            out = np.empty((n, 2))
        return out[:n, 0].copy(), out[:n, 1].copy()


def translates_meet_ball(mats, geos, x, y, sinh_r, force_numpy: bool = False) -> np.ndarray:
    mats = np.ascontiguousarray(mats, dtype=np.float64).reshape(-1, 4)
    geos = np.ascontiguousarray(geos, dtype=np.float64).reshape(-1, 4)
    if HAVE_NUMBA and not force_numpy:
        return translates_meet_ball_nb(mats, geos, float(x), float(y), float(sinh_r))
    return translates_meet_ball_np(mats, geos, x, y, sinh_r)


def _arc_table(mode: int, params: np.ndarray) -> np.ndarray:
    """Arc ends as unit vectors for the numba predicates (modes 1 and 2)."""
    if mode == 1:
        spans = [(params[0], params[1]), (params[2], params[3])]
    elif mode == 2:
        k = params.shape[0] - 1
        tol = params[k]
        spans = [(params[i] - tol, params[(i + 1) % k] + tol) for i in range(k)]
    else:
        return np.zeros((0, 5))
    rows = []
    for s, e in spans:
        big = (e - s) % TWO_PI > math.pi
        rows.append((math.cos(s), math.sin(s), math.cos(e), math.sin(e), float(big)))
    return np.array(rows, dtype=np.float64)


def enumerate_hits(gens, geo, max_len, mode, params, force_numpy: bool = False):
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    geo = np.ascontiguousarray(geo, dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    if HAVE_NUMBA and not force_numpy:
        return enumerate_hits_nb(gens, geo, int(max_len), int(mode), params)
    return enumerate_hits_np(gens, geo, int(max_len), int(mode), params)
