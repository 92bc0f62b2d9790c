"""Command line drivers.

Every verb writes CSV (or JSON for currents, reports and crossing summaries) preceded by ``#``
provenance lines: package and library versions, preset digest and the
parameters of the run.  Output depends only on the arguments.

Exit codes: 0 success, 2 precondition violation, 3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__, _kernels
from .errors import DegeneracyError, PreconditionError

EXIT_OK, EXIT_PRECONDITION, EXIT_DEGENERACY = 0, 2, 3


def _versions() -> str:
    import numpy

    try:
        import numba

        nb = numba.__version__
    except ImportError:  # pragma: no cover
        nb = "absent"
    return f"cuspcurrents {__version__}; numpy {numpy.__version__}; numba {nb}; backend {_kernels.backend()}"


def _header(preset, args, extra: dict | None = None) -> list[str]:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "report") and v is not None}
    if extra:
        params.update(extra)
    return [
        f"# {_versions()}",
        f"# preset {preset.name} digest {preset.digest()}",
        "# params " + json.dumps(params, sort_keys=True, default=str),
    ]


def _emit(args, header: list[str], rows: list[dict], fields: list[str], trailer: list[str] = ()) -> None:
    buf = io.StringIO()
    buf.write("\n".join(header) + "\n")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r[k]) for k in fields})
    for t in trailer:
        buf.write(t + "\n")
    _write(args.out, buf.getvalue())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _preset(args):
    from .fuchsian import get_preset

    return get_preset(args.preset)


def _boxes(preset, args):
    from .currents import box_from_json, default_box_suite

    if not args.boxes:
        return default_box_suite(preset)
    with open(args.boxes) as fh:
        data = json.load(fh)
    return [(d["name"], box_from_json(d["box"])) for d in data]


def _lambda(preset, args):
    from .fuchsian import HorocycleParameter, validate_horocycle_parameter

    if not args.lam:
        return preset.default_lambda
    sizes = tuple(float(x) for x in args.lam.split(","))
    lam = HorocycleParameter(sizes)
    validate_horocycle_parameter(preset, lam)
    return lam


def _current(preset, path: str):
    from .currents import DiscreteCurrent

    with open(path) as fh:
        return DiscreteCurrent.from_json(preset, json.load(fh))


# ---------------------------------------------------------------------------
# verbs


def cmd_converge_closed(args) -> int:
    from .currents import anbn_sequence, eta_cusp_pair, evaluate_box
    from .geom import INF, BoundaryPoint

    P = _preset(args)
    boxes = _boxes(P, args)
    ell = eta_cusp_pair(P, BoundaryPoint.rational(0), INF)
    from .currents import DiscreteCurrent

    target = {name: 2 * evaluate_box(P, DiscreteCurrent.of(ell), box) for name, box in boxes}
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        mu = DiscreteCurrent.of(anbn_sequence(P, n))
        for name, box in boxes:
            c = evaluate_box(P, mu, box)
            rows.append({"n": n, "box": name, "count": c, "target": target[name], "delta": c - target[name]})
    trailer = []
    for name, _ in boxes:
        deltas = [(r["n"], r["delta"]) for r in rows if r["box"] == name]
        N = None
        for n, d in reversed(deltas):
            if d != 0:
                break
            N = n
        trailer.append(f"# stabilization {name} N={N if N is not None else 'none'}")
    _emit(args, _header(P, args), rows, ["n", "box", "count", "target", "delta"], trailer)
    return EXIT_OK


def cmd_converge_cusp(args) -> int:
    from .currents import DiscreteCurrent, cusp_pair_sequence, eta_closed, evaluate_box
    from .geom import BoundaryPoint

    P = _preset(args)
    boxes = _boxes(P, args)
    p, q = BoundaryPoint.parse(args.p), BoundaryPoint.parse(args.q)
    target = {name: evaluate_box(P, DiscreteCurrent.of(eta_closed(P, args.g)), box) for name, box in boxes}
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        mu = DiscreteCurrent.of(cusp_pair_sequence(P, args.g, p, q, n))
        for name, box in boxes:
            s = evaluate_box(P, mu, box) / (2 * n)
            rows.append({"n": n, "box": name, "scaled": s, "target": target[name], "n_delta": n * abs(s - target[name])})
    _emit(args, _header(P, args), rows, ["n", "box", "scaled", "target", "n_delta"])
    return EXIT_OK


def cmd_blowup(args) -> int:
    from .currents import eta_cusp_pair
    from .geom import INF, BoundaryPoint
    from .intersect import atom_intersection, blowup_table

    P = _preset(args)
    rows = blowup_table(P, args.n_max) if args.n_max >= 1 else []
    ell = eta_cusp_pair(P, BoundaryPoint.rational(0), INF)
    trailer = [f"# constant i(ell,ell)={atom_intersection(P, ell, ell)}"]
    _emit(args, _header(P, args), rows, ["n", "intersection", "lower_bound", "bound_certified"], trailer)
    return EXIT_OK


def cmd_densify(args) -> int:
    from .approx import densify

    P = _preset(args)
    if not args.input:
        raise PreconditionError("densify needs --input CURRENT.json")
    mu = _current(P, args.input)
    nu, report = densify(P, mu, r=args.radius, lam=_lambda(P, args), eps=args.eps, boxes=_boxes(P, args))
    report["provenance"] = _header(P, args)
    _write(args.out, json.dumps(nu.to_json(), indent=1, sort_keys=True) + "\n")
    if args.report:
        _write(args.report, json.dumps(report, indent=1, sort_keys=True, default=str) + "\n")
    return EXIT_OK


def cmd_limitset(args) -> int:
    from .fuchsian import get_preset
    from .limitset import convergence_table

    P = get_preset(args.preset)
    ns = []
    n = 2
    while n <= args.n_max:
        ns.append(n)
        n *= 2
    rows = convergence_table(ns, args.depth)
    _emit(args, _header(P, args), rows, ["n", "depth", "hausdorff"])
    return EXIT_OK


def cmd_eval(args) -> int:
    from .currents import evaluate_box

    P = _preset(args)
    if not args.input:
        raise PreconditionError("eval needs --input CURRENT.json")
    mu = _current(P, args.input)
    rows = [{"box": name, "value": evaluate_box(P, mu, box)} for name, box in _boxes(P, args)]
    _emit(args, _header(P, args), rows, ["box", "value"])
    return EXIT_OK


def cmd_intersect(args) -> int:
    from .intersect import atom_intersection, crossing_list

    P = _preset(args)
    if not (args.input and args.input2):
        raise PreconditionError("intersect needs --input and --input2")
    mu, nu = _current(P, args.input), _current(P, args.input2)
    pairs = []
    total = 0.0
    for w1, a1 in mu.atoms:
        for w2, a2 in nu.atoms:
            count = atom_intersection(P, a1, a2)
            total += w1 * w2 * count
            pts = [[round(c.point.real, 12), round(c.point.imag, 12)] for c in crossing_list(P, a1, a2)]
            pairs.append({"atom1": str(a1), "atom2": str(a2), "weight1": w1, "weight2": w2,
                          "crossings": count, "points": sorted(pts)})
    summary = {"provenance": _header(P, args), "intersection": total, "pairs": pairs}
    _write(args.out, json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .currents import eta_closed, eta_cusp_pair
    from .geom import INF, BoundaryPoint
    from .intersect import atom_intersection, oracle_intersection

    P = _preset(args)
    atoms = {
        "ell": eta_cusp_pair(P, BoundaryPoint.rational(0), INF),
        "ab": eta_closed(P, "ab"),
        "aabb": eta_closed(P, "aabb"),
    }
    rows = []
    names = sorted(atoms)
    for i, x in enumerate(names):
        for y in names[i:]:
            smart = atom_intersection(P, atoms[x], atoms[y])
            brute = oracle_intersection(P, atoms[x], atoms[y], args.max_len)
            rows.append({"atom1": x, "atom2": y, "smart": smart, "oracle": brute, "agree": smart == brute})
    _emit(args, _header(P, args), rows, ["atom1", "atom2", "smart", "oracle", "agree"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cuspcurrents", description="Geodesic current experiments on cusped surfaces.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", default="gamma2")
    common.add_argument("--boxes", help="JSON list of {name, box} (default: built-in suite)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("converge-closed", parents=[common], help="a^n b^n counts against twice the {0,inf} current")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=64)
    p.set_defaults(func=cmd_converge_closed)

    p = sub.add_parser("converge-cusp", parents=[common], help="cusp-pair counts over 2n against a closed current")
    p.add_argument("--n-min", type=int, default=8)
    p.add_argument("--n-max", type=int, default=128)
    p.add_argument("--g", default="ab")
    p.add_argument("--p", default="inf")
    p.add_argument("--q", default="0")
    p.set_defaults(func=cmd_converge_cusp)

    p = sub.add_parser("blowup", parents=[common], help="i(a^n b^n, {0,inf}) table")
    p.add_argument("--n-max", type=int, default=32)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("densify", parents=[common], help="approximate a current by closed and cusp-pair geodesics")
    p.add_argument("--input")
    p.add_argument("--report")
    p.add_argument("--lambda", dest="lam", help="comma-separated horoball sizes, one per vertex")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--eps", type=float, help="weight tolerance; 0 demands exact weights")
    p.set_defaults(func=cmd_densify)

    p = sub.add_parser("limitset", parents=[common], help="ping-pong limit set distance to {0,inf}")
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--depth", type=int, default=8)
    p.set_defaults(func=cmd_limitset)

    p = sub.add_parser("eval", parents=[common], help="evaluate a current on boxes")
    p.add_argument("--input")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("intersect", parents=[common], help="intersection number of two currents")
    p.add_argument("--input")
    p.add_argument("--input2")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("oracle", parents=[common], help="compare intersection numbers with brute-force enumeration")
    p.add_argument("--max-len", type=int, default=14)
    p.set_defaults(func=cmd_oracle)
    return ap


def validate(args) -> None:
    """Reject inconsistent configurations before any computation."""
    for name in ("n_min", "n_max", "depth", "radius", "max_len"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "n_max" else 1):
            raise PreconditionError(f"--{name.replace('_', '-')} must be positive, got {v}")
    if getattr(args, "eps", None) is not None and not args.eps >= 0:
        raise PreconditionError(f"--eps must be >= 0, got {args.eps}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        validate(args)
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DegeneracyError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
