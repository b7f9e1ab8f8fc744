"""Command-line front end: polygon spectra, bifurcation tables, censuses,
collinear solves, Morse-consistency checks and interval certification.

Every command embeds a run manifest (tool version, full parameter set,
seed, output list) in its JSON payload; re-running with the same
parameters reproduces byte-identical payloads apart from the timestamp.
Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__, collinear, core, morse, polygon, rigor, search

WORKERS_ENV = "CENTCONF_WORKERS"


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _manifest(subcommand: str, params: dict, seed=None, outputs=None) -> dict:
    return {
        "tool": "centconf",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs or [],
    }


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _positions_list(config: core.Configuration) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in config.positions]


def _signature_string(sig: tuple) -> str:
    key, mark = sig
    return ",".join(str(v) for v in key) + f"|{mark}"


def render_svg(config: core.Configuration, path: str, label: str = "") -> None:
    """Static 512x512 SVG of a configuration with a unit-distance scale bar."""
    size = 512
    margin = 0.10
    pos = config.positions
    span = max(
        float(np.max(pos[:, 0]) - np.min(pos[:, 0])),
        float(np.max(pos[:, 1]) - np.min(pos[:, 1])),
        1e-9,
    )
    scale = size * (1.0 - 2.0 * margin) / span
    cx = 0.5 * float(np.max(pos[:, 0]) + np.min(pos[:, 0]))
    cy = 0.5 * float(np.max(pos[:, 1]) + np.min(pos[:, 1]))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    bar = scale * 1.0
    parts.append(
        f'<line x1="20" y1="{size - 20}" x2="{20 + bar:.2f}" y2="{size - 20}" '
        f'stroke="black" stroke-width="2"/>'
    )
    parts.append(f'<text x="20" y="{size - 28}" font-size="14">1</text>')
    if label:
        parts.append(f'<text x="20" y="28" font-size="14">{label}</text>')
    for x, y in pos:
        px = size / 2 + (x - cx) * scale
        py = size / 2 - (y - cy) * scale
        parts.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="7" fill="#1f77b4" '
                     f'stroke="black" stroke-width="1"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _class_record(cp: search.CriticalPoint) -> dict:
    return {
        "positions": _positions_list(cp.configuration),
        "f_value": cp.f_value,
        "eigenvalues": list(cp.eigenvalues),
        "morse_index": cp.morse_index,
        "degenerate": cp.degenerate,
        "signature": _signature_string(cp.signature),
        "multiplicity": cp.multiplicity,
        "symmetry_order": cp.symmetry_order,
    }


def cmd_polygon(args) -> int:
    spec = polygon.polygon_spectrum(args.n, args.a)
    index, degenerate = polygon.polygon_morse_index(args.n, args.a)
    rows = [
        {
            "i": i,
            "P": spec.diagonals[i][0],
            "Q": spec.diagonals[i][1],
            "s": spec.diagonals[i][2],
            "lambda_plus": spec.pairs[i][0],
            "lambda_minus": spec.pairs[i][1],
        }
        for i in range(args.n)
    ]
    results = {
        "n": args.n,
        "a": args.a,
        "radius": spec.radius,
        "morse_index": index,
        "degenerate": degenerate,
        "blocks": rows,
    }
    if args.format == "json":
        payload = {"manifest": _manifest("polygon", {"n": args.n, "a": args.a}), "results": results}
        _write_json(args.out, payload)
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["i", "P", "Q", "s", "lambda_plus", "lambda_minus"])
        for r in rows:
            writer.writerow([r["i"], r["P"], r["Q"], r["s"], r["lambda_plus"], r["lambda_minus"]])
        _emit(args.out, buf.getvalue())
    else:
        lines = [
            f"regular {args.n}-gon at A = {args.a}",
            f"radius = {spec.radius:.12g}",
            f"morse index = {index}  degenerate = {degenerate}",
            f"{'i':>3} {'P':>18} {'Q':>18} {'s':>18} {'lambda+':>18} {'lambda-':>18}",
        ]
        for r in rows:
            lines.append(
                f"{r['i']:>3} {r['P']:>18.10g} {r['Q']:>18.10g} {r['s']:>18.10g} "
                f"{r['lambda_plus']:>18.10g} {r['lambda_minus']:>18.10g}"
            )
        _emit(args.out, "\n".join(lines) + "\n")
    return 0


def _emit(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_n_list(raw: str) -> list[int]:
    out: list[int] = []
    for part in raw.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty n list")
    return out


def cmd_bifurcation(args) -> int:
    ns = _parse_n_list(args.n_list)
    rows = []
    for n in ns:
        brackets = polygon.scan_sign_changes(n)
        a_n = polygon.find_bifurcation(n, 2.0 + 1e-6, 40.0, args.tol)
        pade = polygon.pade_estimate(n) if 5 <= n <= 200 else None
        rows.append(
            {
                "n": n,
                "brackets": [[lo, hi] for lo, hi in brackets],
                "a_n": a_n,
                "pade": pade,
                "relative_difference": None if pade is None else abs(a_n - pade) / a_n,
            }
        )
    values = [r["a_n"] for r in rows]
    results = {
        "rows": rows,
        "monotone_decreasing": all(x > y for x, y in zip(values, values[1:])),
    }
    payload = {
        "manifest": _manifest("bifurcation", {"n_list": args.n_list, "tol": args.tol}),
        "results": results,
    }
    _write_json(args.out, payload)
    return 0


def cmd_survey(args) -> int:
    model = core.PotentialModel.equal_masses(args.n, args.a)
    result = search.survey(
        model, args.starts, args.seed,
        r_min=args.r_min, r_max=args.r_max, workers=args.workers or _workers(),
    )
    classes = result.classes
    if not args.no_collinear:
        extra = []
        for ordering in collinear.enumerate_orderings(args.n):
            cfg = collinear.collinear_solve(model, ordering)
            extra.append(search.classify(model, cfg))
        classes = search.merge_censuses(classes, extra)
    census = [(cp.morse_index, cp.multiplicity) for cp in classes]
    m_poly = morse.morse_polynomial(census)
    p_poly = morse.poincare_polynomial(args.n, reduced=True)
    consistency = morse.morse_consistency(m_poly, p_poly)

    os.makedirs(args.out_dir, exist_ok=True)
    svg_files = []
    for k, cp in enumerate(classes):
        svg_path = os.path.join(args.out_dir, f"class_{k:03d}.svg")
        render_svg(cp.configuration, svg_path,
                   label=f"index {cp.morse_index}  multiplicity {cp.multiplicity}")
        svg_files.append(os.path.basename(svg_path))
    census_path = os.path.join(args.out_dir, "census.json")
    csv_path = os.path.join(args.out_dir, "summary.csv")
    params = {
        "n": args.n, "a": args.a, "starts": args.starts,
        "r_min": args.r_min, "r_max": args.r_max,
        "collinear_merge": not args.no_collinear,
    }
    payload = {
        "manifest": _manifest("survey", params, seed=args.seed,
                              outputs=["census.json", "summary.csv", *svg_files]),
        "results": {
            "classes": [_class_record(cp) for cp in classes],
            "counts": {
                "converged": result.converged,
                "diverged": result.diverged,
                "collided": result.collided,
            },
            "morse_polynomial": list(m_poly.coefficients),
            "poincare_reduced": list(p_poly.coefficients),
            "consistency": {
                "ok": consistency.ok,
                "r": None if consistency.r is None else list(consistency.r.coefficients),
                "reason": consistency.reason,
                "degree": consistency.degree,
            },
        },
    }
    _write_json(census_path, payload)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_id", "index", "multiplicity", "symmetry_order",
                         "f_value", "min_eig", "max_eig", "degenerate"])
        for k, cp in enumerate(classes):
            writer.writerow([k, cp.morse_index, cp.multiplicity, cp.symmetry_order,
                             repr(cp.f_value), repr(cp.eigenvalues[0]),
                             repr(cp.eigenvalues[-1]), cp.degenerate])
    print(f"classes: {len(classes)}")
    print(f"M(t) = {m_poly}")
    if consistency.ok:
        print(f"morse consistency OK, R(t) = {consistency.r}")
    else:
        print(f"morse consistency FAILED: {consistency.reason} at degree {consistency.degree}")
    print(f"outputs in {args.out_dir}")
    return 0


def cmd_collinear(args) -> int:
    masses = tuple(float(v) for v in args.masses.split(",")) if args.masses else (1.0,) * args.n
    model = core.PotentialModel(args.a, masses)
    rows = []
    for ordering in collinear.enumerate_orderings(args.n):
        cfg = collinear.collinear_solve(model, ordering)
        rows.append(
            {
                "ordering": list(ordering),
                "positions": _positions_list(cfg),
                "morse_index": collinear.collinear_index(model, cfg),
            }
        )
    payload = {
        "manifest": _manifest("collinear", {"n": args.n, "a": args.a, "masses": list(masses)}),
        "results": {"orderings": rows, "count": len(rows)},
    }
    _write_json(args.out, payload)
    return 0


def cmd_morse_check(args) -> int:
    if args.census:
        with open(args.census, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        classes = data["results"]["classes"] if "results" in data else data
        pairs = [(c["morse_index"], c["multiplicity"]) for c in classes]
        m_poly = morse.morse_polynomial(pairs)
        n = len(classes[0]["positions"])
    else:
        if not args.m or args.n is None:
            raise ValueError("need --m and --n (or --census)")
        m_poly = morse.IntPolynomial(tuple(int(v) for v in args.m.split(",")))
        n = args.n
    reduced = not args.full_poincare
    p_poly = morse.poincare_polynomial(n, reduced=reduced)
    res = morse.morse_consistency(m_poly, p_poly)
    payload = {
        "manifest": _manifest(
            "morse-check",
            {"m": list(m_poly.coefficients), "n": n,
             "poincare": "reduced" if reduced else "full"},
        ),
        "results": {
            "morse": list(m_poly.coefficients),
            "poincare": list(p_poly.coefficients),
            "ok": res.ok,
            "r": None if res.r is None else list(res.r.coefficients),
            "reason": res.reason,
            "degree": res.degree,
        },
    }
    _write_json(args.out, payload)
    return 0 if res.ok else 3


def cmd_rigor(args) -> int:
    region_spec = json.loads(args.region)
    bounds = region_spec["coords"] if isinstance(region_spec, dict) else region_spec
    exponent = region_spec.get("a") if isinstance(region_spec, dict) else None
    box = rigor.IntervalBox.from_bounds(bounds, exponent)
    model = core.PotentialModel.equal_masses(box.n_bodies, args.a)
    result = rigor.branch_and_prune(
        model, box, args.depth, args.budget, mode=args.mode,
        drop_coords=tuple(int(v) for v in args.drop.split(",")) if args.drop else (),
    )
    header = _manifest(
        "rigor",
        {"region": region_spec, "a": args.a, "depth": args.depth,
         "budget": args.budget, "mode": args.mode,
         "rounding_model": "epsilon-inflation (1+4u) plus 2*tiny",
         "sigma_margin_factor": rigor.SIGMA_MARGIN_FACTOR},
    )
    lines = [json.dumps({"manifest": header}, sort_keys=True)]
    lines += [json.dumps(entry, sort_keys=True) for entry in result.log]
    summary = {
        "excluded_boxes": len(result.excluded),
        "unresolved_boxes": len(result.unresolved),
        "excluded_volume": sum(b.volume() for b in result.excluded),
        "unresolved_volume": sum(b.volume() for b in result.unresolved),
    }
    lines.append(json.dumps({"summary": summary}, sort_keys=True))
    _emit(args.out, "\n".join(lines) + "\n")
    if not args.out:
        pass
    else:
        print(f"excluded {summary['excluded_boxes']} boxes, "
              f"{summary['unresolved_boxes']} unresolved")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centconf",
        description="Planar N-body central configurations for homogeneous potentials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polygon", help="spectrum of the equal-mass regular N-gon")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_polygon)

    p = sub.add_parser("bifurcation", help="bifurcation exponents A_N with Pade comparison")
    p.add_argument("--n-list", required=True, help="e.g. '5,6,7' or '5..30'")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bifurcation)

    p = sub.add_parser("survey", help="multi-start census of central configurations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--starts", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-dir", default="survey_out")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help=f"default: ${WORKERS_ENV} or available parallelism")
    p.add_argument("--no-collinear", action="store_true",
                   help="skip merging the collinear classes")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("collinear", help="unique collinear configuration per ordering")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--masses", default=None, help="comma separated, default equal")
    p.add_argument("--out")
    p.set_defaults(func=cmd_collinear)

    p = sub.add_parser("morse-check", help="check M = P + (1+t) R with R >= 0")
    p.add_argument("--m", default=None, help="Morse coefficients, e.g. '6,24,20'")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--census", default=None, help="census.json from a survey run")
    p.add_argument("--full-poincare", action="store_true",
                   help="use the full product instead of the reduced polynomial")
    p.add_argument("--out")
    p.set_defaults(func=cmd_morse_check)

    p = sub.add_parser("rigor", help="branch-and-prune interval certification")
    p.add_argument("--region", required=True,
                   help='JSON: [[lo,hi],...] or {"coords": [...], "a": [lo,hi]}')
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--mode", choices=["gradient", "jacobian"], default="gradient")
    p.add_argument("--drop", default="1", help="gauge columns to drop in jacobian mode")
    p.add_argument("--out", help="certification log (JSON lines)")
    p.set_defaults(func=cmd_rigor)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, core.CollisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except core.ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
