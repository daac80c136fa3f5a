"""splitdyn command-line interface.

One binary, subcommand style.  Every run prints (or writes) output that
embeds the exact command record, so re-running the same record reproduces
byte-identical exact results and bit-identical seeded numeric results.
Numeric defaults live in config.py; only the seed and thread count may come
from the environment.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, config
from .classify import (
    SemiconjugacySolution,
    UnicriticalMap,
    classify_semiconjugacy,
    classify_unicritical_pair,
    f_delta,
    gap_data,
    generate_semiconjugacy,
    symmetries_of,
)
from .curves import BiCurve, SplitEndo, curve_preperiodicity, image_curve, is_invariant, ms_curve, preperiodic_pairs_on_curve
from .errors import SplitdynError
from .experiments import run_experiment
from .field import Field, QQ
from .heights import (
    ProjPointQ,
    RationalMap,
    canonical_height,
    is_preperiodic,
    naive_height,
    preperiodic_points,
    product_formula_check,
)
from .numeric import (
    EmpiricalMeasure,
    GermSeries,
    curve_pullback_measure,
    germ_equality_residual,
    julia_render,
    measure_discrepancy,
    periodic_points,
    poincare_series,
    sample_invariant_measure,
)
from .parse import (
    field_from_json,
    parse_map,
    parse_poly,
    poly_to_json,
)
from .poly import LinearPoly, Poly, set_bit_budget


def _parse_field(spec: str | None) -> Field:
    if not spec:
        return QQ
    return field_from_json(json.loads(spec))


def _parse_scalar(text: str, field: Field):
    if field.is_rationals:
        return field.embed(Fraction(text))
    if "," in text:
        return field.element([Fraction(part) for part in text.split(",")])
    return field.embed(Fraction(text))


def _parse_point(text: str) -> ProjPointQ:
    text = text.strip()
    if text in ("inf", "oo", "infinity"):
        return ProjPointQ.infinity()
    if ":" in text:
        a, b = text.split(":")
        return ProjPointQ(int(a), int(b))
    return ProjPointQ.from_rational(Fraction(text))


def _parse_complex(text: str) -> complex:
    if "," in text:
        re, im = text.split(",")
        return complex(float(Fraction(re)), float(Fraction(im)))
    return complex(float(Fraction(text)), 0.0)


def _parse_linear(text: str, field: Field = QQ) -> LinearPoly:
    p = parse_poly(text, field)
    if p.degree > 1 or p.degree < 0:
        raise SplitdynError(f"{text!r} is not a linear map")
    return LinearPoly(p.coeff(1), p.coeff(0))


def _parse_curve(text: str) -> BiCurve:
    text = text.strip()
    if text.startswith("@"):
        text = Path(text[1:]).read_text().strip()
    if text.startswith("{"):
        data = json.loads(text)
        return BiCurve.from_monomials(data["monomials"])
    return BiCurve(text)


def _curve_json(curve: BiCurve) -> dict:
    return {"monomials": curve.to_monomials(), "bidegree": list(curve.bidegree)}


def _command_record(args: argparse.Namespace) -> dict:
    record = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    record["version"] = __version__
    return record


def _emit_json(args, result) -> None:
    payload = {"command": _command_record(args), "result": result}
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _format_float(v: float) -> str:
    return f"{v:.17g}"


def _write_measure_csv(args, measure: EmpiricalMeasure) -> None:
    lines = [
        "# splitdyn-measure " + config.DISCREPANCY_DICTIONARY_VERSION,
        "# command: " + json.dumps(_command_record(args), sort_keys=True, default=str),
    ]
    if measure.is_planar_pair:
        lines.append("re1,im1,re2,im2,weight")
        for (z1, z2), w in zip(measure.points, measure.weights):
            lines.append(
                ",".join(
                    _format_float(v)
                    for v in (z1.real, z1.imag, z2.real, z2.imag, w)
                )
            )
    else:
        lines.append("re,im,weight")
        for z, w in zip(measure.points, measure.weights):
            lines.append(",".join(_format_float(v) for v in (z.real, z.imag, w)))
    text = "\n".join(lines) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def read_measure_csv(path: str) -> EmpiricalMeasure:
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise SplitdynError(f"no measure data in {path}")
    data = np.array(rows)
    if len(header) == 3:
        points = data[:, 0] + 1j * data[:, 1]
        weights = data[:, 2]
    elif len(header) == 5:
        points = np.stack(
            [data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3]], axis=1
        )
        weights = data[:, 4]
    else:
        raise SplitdynError(f"unrecognized measure header in {path}")
    return EmpiricalMeasure(points, weights, None)


def _write_ppm(args, image: np.ndarray) -> None:
    out = getattr(args, "out", None)
    if not out:
        raise SplitdynError("julia-render requires --out for the binary image")
    height, width = image.shape
    record = json.dumps(_command_record(args), sort_keys=True, default=str)
    header = f"P5\n# command: {record}\n{width} {height}\n255\n"
    with open(out, "wb") as fh:
        fh.write(header.encode())
        fh.write(image.astype(np.uint8).tobytes())


# -- handlers -----------------------------------------------------------------------


def _cmd_height(args):
    f = parse_map(args.map)
    f = f if isinstance(f, RationalMap) else RationalMap(f)
    point = _parse_point(args.point)
    hv = canonical_height(f, point, args.tol)
    _emit_json(
        args,
        {
            "value": hv.value,
            "error": hv.error_radius,
            "places": [
                {"v": str(place), "lambda": lam} for place, lam in hv.per_place
            ],
            "naive": naive_height(point),
        },
    )


def _cmd_preperiodic(args):
    f = parse_map(args.map)
    f = f if isinstance(f, RationalMap) else RationalMap(f)
    point = _parse_point(args.point)
    result = is_preperiodic(f, point)
    _emit_json(
        args,
        {
            "preperiodic": result.preperiodic,
            "tail": result.tail,
            "period": result.period,
            "escape_step": result.escape_step,
            "bound": result.bound,
            "orbit": [str(p) for p in result.orbit],
        },
    )


def _cmd_orbit(args):
    f = parse_map(args.map)
    f = f if isinstance(f, RationalMap) else RationalMap(f)
    point = _parse_point(args.point)
    orbit = [point]
    for _ in range(args.steps):
        orbit.append(f.apply(orbit[-1]))
    _emit_json(args, {"orbit": [str(p) for p in orbit]})


def _cmd_enumerate_preperiodic(args):
    f = parse_map(args.map)
    f = f if isinstance(f, RationalMap) else RationalMap(f)
    pts = preperiodic_points(f, args.height_bound)
    _emit_json(
        args,
        {"count": len(pts), "points": [str(p) for p in pts], "bound": f.escape_bound()},
    )


def _split_endo(args) -> SplitEndo:
    fx = parse_map(args.fx)
    gy = parse_map(args.gy)
    fx = fx if isinstance(fx, RationalMap) else RationalMap(fx)
    gy = gy if isinstance(gy, RationalMap) else RationalMap(gy)
    return SplitEndo(fx, gy, args.n, args.m)


def _cmd_curve_image(args):
    curve = _parse_curve(args.curve)
    image = image_curve(curve, _split_endo(args))
    _emit_json(args, {"curve": _curve_json(image)})


def _cmd_curve_invariant(args):
    curve = _parse_curve(args.curve)
    _emit_json(args, {"invariant": is_invariant(curve, _split_endo(args))})


def _cmd_curve_orbit(args):
    curve = _parse_curve(args.curve)
    report = curve_preperiodicity(
        curve, _split_endo(args), args.max_steps, args.degree_budget
    )
    _emit_json(
        args,
        {
            "status": report.status,
            "preperiod": report.preperiod,
            "period": report.period,
            "bidegrees": [list(b) for b in report.bidegrees],
        },
    )


def _cmd_ms_curve(args):
    poly = parse_poly(args.poly)
    L = _parse_linear(args.linear)
    curve = ms_curve(poly, args.n, args.m, L)
    _emit_json(args, {"curve": _curve_json(curve)})


def _cmd_curve_preperiodic_pairs(args):
    curve = _parse_curve(args.curve)
    fx = parse_map(args.fx)
    gy = parse_map(args.gy)
    report = preperiodic_pairs_on_curve(curve, fx, gy, args.budget)
    _emit_json(
        args,
        {
            "pairs": [[str(a), str(b)] for a, b in report.pairs],
            "failures": [[str(a), str(b)] for a, b in report.failures],
            "scanned": report.scanned,
            "truncated": report.truncated,
        },
    )


def _cmd_classify_pair(args):
    field = _parse_field(args.field)
    u1 = UnicriticalMap(args.d1, _parse_scalar(args.c1, field))
    u2 = UnicriticalMap(args.d2, _parse_scalar(args.c2, field))
    verdict = classify_unicritical_pair(u1, u2)
    _emit_json(
        args,
        {
            "verdict": verdict.verdict.value,
            "witness": str(verdict.witness) if verdict.witness is not None else None,
        },
    )


def _cmd_semiconj_generate(args):
    field = _parse_field(args.field)
    u = UnicriticalMap(args.d, _parse_scalar(args.c, field))
    L = _parse_linear(args.linear, field)
    A, B = generate_semiconjugacy(u, args.n, args.m, args.delta, L)
    _emit_json(
        args,
        {
            "A": poly_to_json(A),
            "B": poly_to_json(B),
            "A_text": str(A),
            "B_text": str(B),
        },
    )


def _cmd_semiconj_classify(args):
    field = _parse_field(args.field)
    u = UnicriticalMap(args.d, _parse_scalar(args.c, field))
    A = parse_poly(args.A, field)
    B = parse_poly(args.B, field)
    sol = classify_semiconjugacy(u, args.n, A, B)
    _emit_json(
        args,
        {"m": sol.m, "delta": sol.delta, "L": str(sol.L.as_poly())},
    )


def _cmd_symmetries(args):
    poly = parse_poly(args.poly, _parse_field(args.field))
    symmetries = symmetries_of(poly)
    _emit_json(args, {"symmetries": [str(s.as_poly()) for s in symmetries]})


def _cmd_gap(args):
    poly = parse_poly(args.poly, _parse_field(args.field))
    data = gap_data(poly)
    _emit_json(
        args,
        {
            "degree": data.degree,
            "gap": data.gap,
            "rotation_order": data.rotation_order,
        },
    )


def _cmd_periodic_points(args):
    f = parse_map(args.map)
    data = periodic_points(f, args.period, args.tol)
    _emit_json(
        args,
        {
            "points": [
                {
                    "point": "inf"
                    if p.point.is_infinity
                    else _format_complex(p.point.to_complex()),
                    "period": p.period,
                    "multiplier": _format_complex(p.multiplier),
                    "repelling": p.repelling,
                }
                for p in data
            ]
        },
    )


def _format_complex(z: complex) -> list[str]:
    return [_format_float(z.real), _format_float(z.imag)]


def _cmd_sample_measure(args):
    f = parse_map(args.map)
    measure = sample_invariant_measure(f, args.samples, args.burn_in, args.seed)
    _write_measure_csv(args, measure)


def _cmd_pullback_measure(args):
    curve = _parse_curve(args.curve)
    f = parse_map(args.map)
    measure = curve_pullback_measure(
        curve, f, args.coordinate, args.samples, args.seed, args.burn_in
    )
    _write_measure_csv(args, measure)


def _cmd_discrepancy(args):
    m1 = read_measure_csv(args.a)
    m2 = read_measure_csv(args.b)
    _emit_json(args, {"discrepancy": measure_discrepancy(m1, m2)})


def _cmd_poincare(args):
    f = parse_map(args.map)
    series = poincare_series(f, _parse_complex(args.x0), args.order)
    _emit_json(
        args,
        {
            "fixed_point": _format_complex(series.fixed_point),
            "multiplier": _format_complex(series.multiplier),
            "coefficients": [_format_complex(c) for c in series.coeffs],
            "radius_estimate": series.radius_estimate,
        },
    )


def _cmd_germ_check(args):
    f = parse_map(args.f)
    g = parse_map(args.g)
    h = GermSeries.identity(_parse_complex(args.x0))
    residual = germ_equality_residual(f, g, args.n, args.m, h, args.radius, args.grid)
    _emit_json(args, {"residual": residual})


def _cmd_julia_render(args):
    f = parse_map(args.map)
    image = julia_render(f, args.resolution, args.iterations, args.window)
    _write_ppm(args, image)


def _cmd_experiment(args):
    kwargs = {}
    if args.name == "prop42-diagonal":
        kwargs = {"samples": args.samples, "seed": args.seed}
    report = run_experiment(args.name, **kwargs)
    _emit_json(args, report)
    if not report["passed"]:
        raise SystemExit(1)


# -- parser -------------------------------------------------------------------------


def _add_common(sub, *, seed=False, tol=False, out=True):
    sub.add_argument("--budget-bits", type=int, default=None, help="coefficient-bit budget")
    if seed:
        sub.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    if tol:
        sub.add_argument("--tol", type=float, default=config.DEFAULT_TOL)
    if out:
        sub.add_argument("--out", type=str, default=None, help="write output to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitdyn",
        description=(
            "exact and numerical dynamics for split endomorphisms "
            "(x, y) -> (f(x), g(y)) of P1 x P1"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("height", help="canonical height of a rational point")
    sub.add_argument("--map", required=True)
    sub.add_argument("--point", required=True)
    _add_common(sub, tol=True)
    sub.set_defaults(func=_cmd_height)

    sub = subs.add_parser("preperiodic", help="decide preperiodicity exactly")
    sub.add_argument("--map", required=True)
    sub.add_argument("--point", required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_preperiodic)

    sub = subs.add_parser("orbit", help="exact forward orbit")
    sub.add_argument("--map", required=True)
    sub.add_argument("--point", required=True)
    sub.add_argument("--steps", type=int, default=10)
    _add_common(sub)
    sub.set_defaults(func=_cmd_orbit)

    sub = subs.add_parser("enumerate-preperiodic", help="all rational preperiodic points")
    sub.add_argument("--map", required=True)
    sub.add_argument("--height-bound", type=float, default=None)
    _add_common(sub)
    sub.set_defaults(func=_cmd_enumerate_preperiodic)

    for name, handler in (
        ("curve-image", _cmd_curve_image),
        ("curve-invariant", _cmd_curve_invariant),
        ("curve-orbit", _cmd_curve_orbit),
    ):
        sub = subs.add_parser(name)
        sub.add_argument("--curve", required=True, help="expression, JSON, or @file")
        sub.add_argument("--fx", required=True, help="first-coordinate map")
        sub.add_argument("--gy", required=True, help="second-coordinate map")
        sub.add_argument("--n", type=int, default=1)
        sub.add_argument("--m", type=int, default=1)
        if name == "curve-orbit":
            sub.add_argument("--max-steps", type=int, default=8)
            sub.add_argument("--degree-budget", type=int, default=64)
        _add_common(sub)
        sub.set_defaults(func=handler)

    sub = subs.add_parser("ms-curve", help="curve from iterate levels and a linear link")
    sub.add_argument("--poly", required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--linear", default="x", help="linear polynomial, e.g. '2x+1'")
    _add_common(sub)
    sub.set_defaults(func=_cmd_ms_curve)

    sub = subs.add_parser("curve-preperiodic-pairs", help="transfer harvest on a curve")
    sub.add_argument("--curve", required=True)
    sub.add_argument("--fx", required=True)
    sub.add_argument("--gy", required=True)
    sub.add_argument("--budget", type=int, default=10_000)
    _add_common(sub)
    sub.set_defaults(func=_cmd_curve_preperiodic_pairs)

    sub = subs.add_parser("classify-pair", help="unicritical pairing criterion")
    sub.add_argument("--d1", type=int, required=True)
    sub.add_argument("--c1", required=True)
    sub.add_argument("--d2", type=int, required=True)
    sub.add_argument("--c2", required=True)
    sub.add_argument("--field", default=None, help="field JSON; default Q")
    _add_common(sub)
    sub.set_defaults(func=_cmd_classify_pair)

    sub = subs.add_parser("semiconj-generate")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--c", required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--delta", type=int, required=True)
    sub.add_argument("--linear", default="x")
    sub.add_argument("--field", default=None)
    _add_common(sub)
    sub.set_defaults(func=_cmd_semiconj_generate)

    sub = subs.add_parser("semiconj-classify")
    sub.add_argument("--d", type=int, required=True)
    sub.add_argument("--c", required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--A", required=True)
    sub.add_argument("--B", required=True)
    sub.add_argument("--field", default=None)
    _add_common(sub)
    sub.set_defaults(func=_cmd_semiconj_classify)

    sub = subs.add_parser("symmetries", help="linear maps fixing a polynomial")
    sub.add_argument("--poly", required=True)
    sub.add_argument("--field", default=None)
    _add_common(sub)
    sub.set_defaults(func=_cmd_symmetries)

    sub = subs.add_parser("gap", help="leading gap and rotation order")
    sub.add_argument("--poly", required=True)
    sub.add_argument("--field", default=None)
    _add_common(sub)
    sub.set_defaults(func=_cmd_gap)

    sub = subs.add_parser("periodic-points")
    sub.add_argument("--map", required=True)
    sub.add_argument("--period", type=int, required=True)
    _add_common(sub, tol=True)
    sub.set_defaults(func=_cmd_periodic_points)

    sub = subs.add_parser("sample-measure")
    sub.add_argument("--map", required=True)
    sub.add_argument("--samples", type=int, default=config.DEFAULT_SAMPLES)
    sub.add_argument("--burn-in", type=int, default=config.DEFAULT_BURN_IN)
    _add_common(sub, seed=True)
    sub.set_defaults(func=_cmd_sample_measure)

    sub = subs.add_parser("pullback-measure")
    sub.add_argument("--curve", required=True)
    sub.add_argument("--map", required=True)
    sub.add_argument("--coordinate", type=int, choices=(1, 2), required=True)
    sub.add_argument("--samples", type=int, default=config.DEFAULT_SAMPLES)
    sub.add_argument("--burn-in", type=int, default=config.DEFAULT_BURN_IN)
    _add_common(sub, seed=True)
    sub.set_defaults(func=_cmd_pullback_measure)

    sub = subs.add_parser("discrepancy", help="distance between two measure CSVs")
    sub.add_argument("--a", required=True)
    sub.add_argument("--b", required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_discrepancy)

    sub = subs.add_parser("poincare", help="linearizing series at a repelling fixed point")
    sub.add_argument("--map", required=True)
    sub.add_argument("--x0", required=True, help="complex 're' or 're,im'")
    sub.add_argument("--order", type=int, default=12)
    _add_common(sub)
    sub.set_defaults(func=_cmd_poincare)

    sub = subs.add_parser("germ-check", help="residual of the germ identity on a disk")
    sub.add_argument("--f", required=True)
    sub.add_argument("--g", required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--x0", required=True)
    sub.add_argument("--radius", type=float, default=0.1)
    sub.add_argument("--grid", type=int, default=16)
    _add_common(sub)
    sub.set_defaults(func=_cmd_germ_check)

    sub = subs.add_parser("julia-render")
    sub.add_argument("--map", required=True)
    sub.add_argument("--resolution", type=int, default=256)
    sub.add_argument("--iterations", type=int, default=config.DEFAULT_RENDER_ITERATIONS)
    sub.add_argument("--window", type=float, default=config.DEFAULT_RENDER_WINDOW)
    _add_common(sub)
    sub.set_defaults(func=_cmd_julia_render)

    sub = subs.add_parser("experiment", help="run a named batch scenario")
    sub.add_argument("--name", required=True)
    sub.add_argument("--samples", type=int, default=config.DEFAULT_SAMPLES)
    _add_common(sub, seed=True)
    sub.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget_bits", None):
        set_bit_budget(args.budget_bits)
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except SplitdynError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
