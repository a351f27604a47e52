"""Command line: ``darboux verify | orbit | export``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import DarbouxError, DegeneratePoint, UnknownPair, UnknownSuite
from .linalg import rank
from .surfaces import get_pair
from .triplets import CLASSES, ORBIT_ORDER, TWELVE, DarbouxTriplet, apply_word, closure_residual

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3

ORBIT_TOL = 1e-7
COMPONENT_RTOL = 1e-8


def _dump(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _resolve_word(surface: str) -> tuple[str, str]:
    """(label, word) from a label of the twelve surfaces or a word in A and D."""
    if surface in TWELVE:
        return surface, TWELVE[surface]
    word = "" if surface in ("", "id") else surface.upper()
    if set(word) - {"A", "D"}:
        raise ValueError(f"surface must be one of {sorted(TWELVE)} or a word in A and D, "
                         f"got {surface!r}")
    return surface, word


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    from .suites import SUITES, run_suite

    if args.suite not in SUITES + ("all",):
        raise UnknownSuite(f"unknown suite {args.suite!r}")
    pair = get_pair(args.pair)
    reports = run_suite(args.suite, pair, args.grid, args.seed)
    passed = all(r.passed for r in reports)
    if len(reports) == 1:
        payload = reports[0].to_json()
    else:
        payload = {"schema": 1, "version": __version__, "suite": args.suite, "pair": pair.name,
                   "grid": {"n": args.grid}, "seed": args.seed,
                   "reports": [r.to_json() for r in reports], "pass": passed}
    _dump(payload, args.out)
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# orbit


def orbit_table(pair, u: float, v: float) -> dict:
    """The twelve first components at (u, v), their classes and the closure residual."""
    if not bool(pair.domain.is_valid(u, v)):
        raise DegeneratePoint(f"({u}, {v}) lies on the singular set of {pair.name}: "
                              f"{pair.domain.excluded}")
    t = DarbouxTriplet.from_pair(pair, np.array([u]), np.array([v]), ORBIT_ORDER)
    df = np.stack([t.f.partial(1, 0)[0], t.f.partial(0, 1)[0]])
    scale = float(np.max(np.abs(df)))
    rows = []
    for label, word in TWELVE.items():
        row = {"label": label, "word": word}
        try:
            m = apply_word(t, word).f
        except DarbouxError as exc:
            row.update(value=None, rank=None, note=f"undefined: {type(exc).__name__}")
        else:
            d = np.stack([m.partial(1, 0)[0], m.partial(0, 1)[0]])
            r = rank(d, rtol=COMPONENT_RTOL, atol=COMPONENT_RTOL * scale)
            row.update(value=[float(x) for x in m.value[0]], rank=r,
                       note="constant" if r == 0 else ("degenerate" if r == 1 else ""))
        rows.append(row)
    out = {"schema": 1, "pair": pair.name, "point": [u, v], "rows": rows,
           "classes": {k: list(v) for k, v in CLASSES.items()}}
    try:
        out["closure_residual"] = float(closure_residual(t)[0])
    except DarbouxError as exc:
        out["closure_residual"] = None
        out["closure_note"] = f"{type(exc).__name__}: {exc}"
    vals = [r["value"] for r in rows if r["value"] is not None]
    distinct = []
    for val in vals:
        if not any(np.linalg.norm(np.subtract(val, w)) <= ORBIT_TOL * max(1.0, np.linalg.norm(w))
                   for w in distinct):
            distinct.append(val)
    out["distinct"] = len(distinct)
    out["collapsed"] = len(distinct) < 12 or any(r["rank"] != 2 for r in rows)
    return out


def _print_orbit(tab: dict):
    u, v = tab["point"]
    print(f"# pair {tab['pair']} at (u, v) = ({u:g}, {v:g})")
    print(f"{'label':>6}  {'word':<8}  {'x':>14} {'y':>14} {'z':>14}  rank  note")
    for r in tab["rows"]:
        if r["value"] is None:
            print(f"{r['label']:>6}  {r['word'] or '-':<8}  {'':>14} {'':>14} {'':>14}  {'-':>4}  {r['note']}")
            continue
        x, y, z = r["value"]
        print(f"{r['label']:>6}  {r['word'] or '-':<8}  {x:14.8g} {y:14.8g} {z:14.8g}  {r['rank']:>4}  {r['note']}")
    for name, members in tab["classes"].items():
        print(f"# class of {name}: {', '.join(members)}")
    res = tab["closure_residual"]
    print(f"# (DA)^6 closure residual: {'undefined' if res is None else f'{res:.3e}'}")
    print(f"# distinct surfaces: {tab['distinct']}{'  (orbit collapses)' if tab['collapsed'] else ''}")


def cmd_orbit(args) -> int:
    pair = get_pair(args.pair)
    tab = orbit_table(pair, float(args.point[0]), float(args.point[1]))
    if args.json or args.out:
        _dump(tab, args.out)
    else:
        _print_orbit(tab)
    res = tab["closure_residual"]
    return EXIT_OK if res is None or res <= ORBIT_TOL else EXIT_FAIL


# ---------------------------------------------------------------------------
# export


def surface_grid(pair, word: str, n: int) -> np.ndarray:
    """(n*n, 3) values of the first component of ``word`` applied to the pair's triplet."""
    u, v = pair.grid(n, keep_invalid=True)
    bad = np.flatnonzero(~pair.domain.is_valid(u, v))
    if bad.size:
        raise DegeneratePoint(f"grid indices on the singular set: {bad.tolist()}")
    t = DarbouxTriplet.from_pair(pair, u, v, max(ORBIT_ORDER, len(word) + 1))
    try:
        return apply_word(t, word).f.value
    except DarbouxError as exc:
        raise DegeneratePoint(f"word {word!r} is undefined on the grid: {exc}") from exc


def obj_text(vertices: np.ndarray, n: int, header: list[str]) -> str:
    """OBJ mesh of an n x n row-major vertex grid, each quad split into two triangles."""
    lines = [f"# {h}" for h in header]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in vertices]
    for i in range(n - 1):
        for j in range(n - 1):
            a = i * n + j + 1
            b, c, d = a + 1, a + n, a + n + 1
            lines.append(f"f {a} {c} {d}")
            lines.append(f"f {a} {d} {b}")
    return "\n".join(lines) + "\n"


def cmd_export(args) -> int:
    pair = get_pair(args.pair)
    label, word = _resolve_word(args.surface)
    verts = surface_grid(pair, word, args.grid)
    header = [f"darboux {__version__}", f"pair {pair.name}", f"surface {label}",
              f"word {word or '(identity)'}", f"grid {args.grid}x{args.grid}",
              f"u {pair.domain.u_range[0]:g} {pair.domain.u_range[1]:g}",
              f"v {pair.domain.v_range[0]:g} {pair.domain.v_range[1]:g}"]
    text = obj_text(verts, args.grid, header)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .suites import SUITES

    parser = argparse.ArgumentParser(prog="darboux", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a verification suite on a catalog pair")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--pair", default="paraboloid")
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit", help="the twelve surfaces at one point")
    p.add_argument("--pair", default="paraboloid")
    p.add_argument("--point", nargs=2, type=float, required=True, metavar=("U", "V"))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("export", help="export one of the twelve surfaces as a mesh")
    p.add_argument("--pair", default="paraboloid")
    p.add_argument("--surface", default="f")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--format", choices=("obj",), default="obj")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "grid", 2) < 2:
        parser.error("--grid must be at least 2")
    try:
        return args.func(args)
    except (UnknownPair, UnknownSuite) as exc:
        print(f"darboux: error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, DegeneratePoint):
            print(f"darboux: degenerate point: {exc}", file=sys.stderr)
            return EXIT_DEGENERATE
        print(f"darboux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DarbouxError as exc:
        print(f"darboux: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
