"""Batch front end: build pairs, run operator and identity checks, emit
machine-readable reports.

Commands
--------
pair      construct a cataloged pair and export it as JSON
grunsky   build the four operator blocks, report the block-relation residuals
logdet    determinant potential over a list of truncation orders
s1        quadrature report for the universal Liouville action
identity  the S1 vs -12 pi S2 check, one JSON report
invert    inversion-symmetry check (pair vs reflected pair)
fuchsian  octagon group suite (relation, area, automorphy, trace sums)
scl       classical-action report from a given s2_dg and genus
sweep     CSV table over a parameter range

Exit codes: 0 success, 1 a requested tolerance check failed, 2 invalid
input, 3 numerical failure. Configuration may come from ``--config`` files
with ``key = value`` lines (``#`` comments); explicit flags win. The
environment variable ``WELDLAB_OUTDIR`` sets the default output directory.

Every JSON report carries a ``conventions`` block naming the basis, the
sign of the operator entries, and both sign conventions of the potential,
since the literature disagrees on them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import InvalidInput, NumericalFailure
from . import fuchsian as fx
from . import grunsky as gk
from . import liouville as lv
from . import maps as mp

CONVENTIONS = {
    "basis": "e_n(z) = sqrt(n/pi) z^(n-1); estar_n(w) = sqrt(n/pi) w^(-n-1)",
    "block_sign": "b1[m,n] = -sqrt(mn) b_mn (global sign cancels in BB*)",
    "s2_univ": "log det(I - B B*) <= 0",
    "s2_dg": "-s2_univ >= 0 (regularized-trace sign)",
}

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    return f"{x:.17g}"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _out_path(args, default_name: str):
    if args.out:
        return args.out
    outdir = os.environ.get("WELDLAB_OUTDIR", ".")
    return os.path.join(outdir, default_name)


def _write_text(path: str, text: str, verbose: bool):
    with open(path, "w") as fh:
        fh.write(text)
    if verbose:
        print(f"wrote {path}", file=sys.stderr)


def _write_report(args, doc: dict, default_name: str):
    doc = dict(doc)
    doc["conventions"] = CONVENTIONS
    path = _out_path(args, default_name)
    _write_text(path, json.dumps(_jsonify(doc), indent=2, sort_keys=True) + "\n",
                args.verbose)
    return path


def _family_params(args) -> dict:
    if args.family == "identity":
        return {}
    if args.family == "ellipse":
        if args.c is None:
            raise InvalidInput("ellipse needs --c")
        return {"c": args.c}
    if args.family == "fourier_bump":
        if args.eps is None or args.k is None:
            raise InvalidInput("fourier_bump needs --eps and --k")
        return {"eps": args.eps, "k": args.k}
    raise InvalidInput(f"unknown family {args.family!r}")


def _build_pair(args) -> mp.WeldingPair:
    return mp.catalog(args.family, sample_count=args.M, **_family_params(args))


def _orders(args):
    return [int(tok) for tok in args.N.split(",")]


def _grid(args):
    n_r, n_theta = (int(tok) for tok in args.grid.split("x"))
    return n_r, n_theta


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_pair(args) -> int:
    pair = _build_pair(args)
    path = _out_path(args, f"pair_{args.family}.json")
    _write_text(path, mp.pair_to_json(pair), args.verbose)
    return EXIT_OK


def _cmd_grunsky(args) -> int:
    pair = _build_pair(args)
    n = max(_orders(args))
    trunc = gk.build_truncation(pair, n)
    residuals = gk.grunsky_identity_residual(trunc)
    doc = {
        "family": pair.family_tag, "params": pair.params, "N": n,
        "relation_residuals": list(residuals),
        "leading_block": n // 2,
        "spectral_norm_b1": gk.spectral_norm(trunc.b1),
        "spectral_norm_b4": gk.spectral_norm(trunc.b4),
    }
    _write_report(args, doc, f"grunsky_{args.family}_N{n}.json")
    if args.dump_matrices:
        base = _out_path(args, f"grunsky_{args.family}_N{n}")
        for name, mtx in (("b1", trunc.b1), ("b2", trunc.b2),
                          ("b3", trunc.b3), ("b4", trunc.b4)):
            _write_text(f"{base}_{name}.csv", gk.matrix_to_csv(mtx), args.verbose)
    worst = max(residuals)
    return EXIT_OK if worst <= args.tol else EXIT_CHECK_FAILED


def _cmd_logdet(args) -> int:
    pair = _build_pair(args)
    orders = _orders(args)
    n = max(orders)
    route = args.route
    b = gk.build_b1(pair, n) if route == "b1" else gk.build_b4(pair, n)
    report = gk.logdet_potential(b, orders)
    doc = {"family": pair.family_tag, "params": pair.params, "route": route,
           "report": report.to_dict(),
           "s2_univ": report.extrapolated, "s2_dg": -report.extrapolated}
    _write_report(args, doc, f"logdet_{args.family}_{route}.json")
    return EXIT_OK


def _cmd_s1(args) -> int:
    pair = _build_pair(args)
    n_r, n_theta = _grid(args)
    grids = [(n_r // 4, n_theta // 4), (n_r // 2, n_theta // 2), (n_r, n_theta)]
    grids = [(max(g[0], 8), max(g[1], 16)) for g in grids]
    report = lv.s1(pair, grids)
    doc = {"family": pair.family_tag, "params": pair.params,
           "report": report.to_dict(), "S1": report.extrapolated}
    _write_report(args, doc, f"s1_{args.family}.json")
    return EXIT_OK


def _cmd_identity(args) -> int:
    pair = _build_pair(args)
    n_r, n_theta = _grid(args)
    grids = [(max(n_r // 4, 8), max(n_theta // 4, 16)),
             (max(n_r // 2, 8), max(n_theta // 2, 16)), (n_r, n_theta)]
    orders = _orders(args)
    doc = lv.identity_report(pair, grids, orders)
    _write_report(args, doc, f"identity_{args.family}.json")
    rel = doc["residual_identity_relative"]
    return EXIT_OK if rel <= args.tol else EXIT_CHECK_FAILED


def _cmd_invert(args) -> int:
    pair = _build_pair(args)
    n = max(_orders(args))
    chk = gk.inversion_check(pair, n)
    doc = {"family": pair.family_tag, "params": pair.params, "N": n,
           "s2_pair_b1": chk.s2_pair_b1,
           "s2_inverted_b1": chk.s2_inverted_b1,
           "s2_pair_b4": chk.s2_pair_b4,
           "symmetry_gap": chk.symmetry_gap,
           "route_gap": chk.route_gap}
    _write_report(args, doc, f"invert_{args.family}.json")
    ok = chk.symmetry_gap <= args.tol and chk.route_gap <= args.tol
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_fuchsian(args) -> int:
    group = fx.octagon_group()
    enum = fx.enumerate_elements(group, args.L)
    area = fx.domain_area_integral(group)
    rng = np.random.default_rng(7)
    zs = 0.8 * np.sqrt(rng.random(64)) * np.exp(2j * np.pi * rng.random(64))
    ws = 0.8 * np.sqrt(rng.random(64)) * np.exp(2j * np.pi * rng.random(64))
    autom = max(
        fx.automorphy_residual(fx.bergman_kernel, g, zs, ws,
                               conjugate_second=True)
        for g in group.generators)
    sums = {n: fx.alternating_trace_sum(group, n) for n in (1, 2, 3)}
    doc = {
        "relation_residual": group.relation_residual(),
        "relation_word": list(group.relation_word),
        "translation_length": group.translation_length,
        "vertex_radius": group.vertex_radius,
        "element_count": {"L": args.L, "count": enum.count},
        "area_integral": area,
        "genus_minus_one": group.genus - 1,
        "bergman_automorphy_residual": autom,
        "alternating_trace_sums": {str(k): v for k, v in sums.items()},
    }
    _write_report(args, doc, "fuchsian_octagon.json")
    ok = (group.relation_residual() <= 1e-10
          and abs(area["value"] - (group.genus - 1)) <= 1e-4
          and autom <= 1e-10
          and all(abs(v) <= 1e-3 for v in sums.values()))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_scl(args) -> int:
    doc = lv.s_cl_report(args.s2, args.genus)
    _write_report(args, doc, "scl.json")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.family != "ellipse":
        raise InvalidInput("sweep currently supports the ellipse family")
    start, stop, step = (float(t) for t in args.range.split(":"))
    values = []
    v = start
    while v <= stop + 1e-12:
        values.append(round(v, 12))
        v += step
    orders = _orders(args)
    n_r, n_theta = _grid(args)
    grids = [(max(n_r // 2, 8), max(n_theta // 2, 16)), (n_r, n_theta)]
    header = ["family", "param", "S1", "S2_via_B1", "S2_via_B4",
              "residual_identity", "residual_operators", "slack",
              "N", "grid", "error"]
    rows = []
    any_failed = False
    for c in values:
        try:
            pair = mp.catalog("ellipse", sample_count=args.M, c=c)
            rep = lv.identity_report(pair, grids, orders)
            scl = lv.s_cl_report(max(-rep["S2_univ_via_B1"], 0.0), args.genus)
            rows.append([
                "ellipse", _fmt(c), _fmt(rep["S1"]),
                _fmt(rep["S2_univ_via_B1"]), _fmt(rep["S2_univ_via_B4"]),
                _fmt(rep["residual_identity"]),
                _fmt(rep["residual_operators"]), _fmt(scl["slack"]),
                str(max(orders)), f"{n_r}x{n_theta}", ""])
            if rep["residual_identity_relative"] > args.tol:
                any_failed = True
        except (InvalidInput, NumericalFailure) as exc:
            rows.append(["ellipse", _fmt(c)] + [""] * 8 + [str(exc)])
            any_failed = True
    text = ",".join(header) + "\n" + "\n".join(",".join(r) for r in rows) + "\n"
    path = _out_path(args, "sweep_ellipse.csv")
    _write_text(path, text, args.verbose)
    return EXIT_CHECK_FAILED if any_failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _read_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"bad config line: {raw.rstrip()}")
            key, val = (tok.strip() for tok in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _apply_config(args, parser):
    if not args.config:
        return args
    values = _read_config(args.config)
    for key, val in values.items():
        if not hasattr(args, key):
            raise InvalidInput(f"unknown config key: {key}")
        if f"--{key.replace('_', '-')}" in sys.argv or f"--{key}" in sys.argv:
            continue  # explicit flag wins
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, val.lower() in ("1", "true", "yes"))
        elif isinstance(current, int) and not isinstance(current, bool):
            setattr(args, key, int(val))
        elif isinstance(current, float):
            setattr(args, key, float(val))
        elif current is None:
            # untyped optional flag: numbers parse as numbers
            for cast in (int, float):
                try:
                    setattr(args, key, cast(val))
                    break
                except ValueError:
                    continue
            else:
                setattr(args, key, val)
        else:
            setattr(args, key, val)
    return args


def _add_common(sub, family=True, orders="64", grid="256x512", tol=1e-3):
    sub.add_argument("--config", default=None, help="key = value config file")
    sub.add_argument("--out", default=None, help="output file path")
    sub.add_argument("--verbose", "-v", action="store_true")
    sub.add_argument("--tol", type=float, default=tol,
                     help="tolerance for the command's pass/fail check")
    if family:
        sub.add_argument("--family", required=True,
                         choices=["identity", "ellipse", "fourier_bump"])
        sub.add_argument("--c", type=float, default=None, help="ellipse parameter")
        sub.add_argument("--eps", type=float, default=None, help="bump amplitude")
        sub.add_argument("--k", type=int, default=None, help="bump frequency")
        sub.add_argument("--M", type=int, default=1024,
                         help="boundary sample count (power of two)")
        sub.add_argument("--N", default=orders,
                         help="comma-separated truncation orders")
        sub.add_argument("--grid", default=grid, help="n_r x n_theta")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weldlab",
        description="Welding-pair potentials: determinants vs quadrature")
    subs = parser.add_subparsers(dest="command", required=True)

    _add_common(subs.add_parser("pair", help="construct and export a pair"))
    g = subs.add_parser("grunsky", help="operator blocks and residuals")
    _add_common(g, tol=1e-5)
    g.add_argument("--dump-matrices", action="store_true")
    ld = subs.add_parser("logdet", help="determinant potential")
    _add_common(ld)
    ld.add_argument("--route", choices=["b1", "b4"], default="b1")
    _add_common(subs.add_parser("s1", help="Liouville action quadrature"))
    _add_common(subs.add_parser("identity", help="S1 vs -12 pi S2 check"))
    iv = subs.add_parser("invert", help="inversion-symmetry check")
    _add_common(iv, tol=1e-6)
    fz = subs.add_parser("fuchsian", help="octagon basepoint suite")
    _add_common(fz, family=False)
    fz.add_argument("--L", type=int, default=2, help="enumeration word length")
    sc = subs.add_parser("scl", help="classical-action report")
    _add_common(sc, family=False)
    sc.add_argument("--s2", type=float, required=True, help="s2_dg >= 0")
    sc.add_argument("--genus", type=int, default=2)
    sw = subs.add_parser("sweep", help="CSV sweep over a parameter range")
    _add_common(sw)
    sw.add_argument("--range", default="0.1:0.5:0.1", help="start:stop:step")
    sw.add_argument("--genus", type=int, default=2)

    return parser


_COMMANDS = {
    "pair": _cmd_pair,
    "grunsky": _cmd_grunsky,
    "logdet": _cmd_logdet,
    "s1": _cmd_s1,
    "identity": _cmd_identity,
    "invert": _cmd_invert,
    "fuchsian": _cmd_fuchsian,
    "scl": _cmd_scl,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args, parser)
        return _COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
