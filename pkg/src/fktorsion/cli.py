"""Command-line front end.

Commands read one JSON instance (--in), run the computation, and write one
JSON object per evaluation; u-sweeps emit JSON lines ordered by u. CSV
output mirrors the flat numeric fields. Identical inputs and flags give
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys

from . import serialize
from .det_line import metric_element, rep_holonomy
from .errors import ConvergenceError, TorsionError, ValidationError
from .hyperbolic_zeta import (
    QuadratureSpec,
    randol_zeta,
    randol_zeta_prime0,
    surface_torsion_scalar,
    torsion_constant_C,
)
from .index_density import adiabatic_density
from .vn_core import KERNEL_TOL, fk_determinant_invertible
from .zeta_torsion import (
    anomaly_c,
    graded_zeta_prime0,
    relative_torsion,
    torsion,
    variation_check,
)


def _read_instance(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return serialize.loads(fh.read())
    except OSError as exc:
        raise ValidationError("cannot read %s: %s" % (path, exc)) from exc


def _emit(records, fmt: str, out_path):
    if fmt == "json":
        text = "".join(serialize.canonical_dumps(r) + "\n" for r in records)
    else:
        keys = []
        for r in records:
            for k in r:
                if k not in keys and isinstance(r[k], (int, float, bool)):
                    keys.append(k)
        keys.sort()
        lines = [",".join(keys)]
        for r in records:
            cells = []
            for k in keys:
                v = r.get(k, "")
                if isinstance(v, bool):
                    cells.append("true" if v else "false")
                elif isinstance(v, float):
                    cells.append(format(v, ".17g"))
                elif isinstance(v, int):
                    cells.append(str(v))
                else:
                    cells.append("")
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sweep_values(args):
    if args.u_min is None and args.u_max is None:
        return None
    lo = args.u_min if args.u_min is not None else args.u_max
    hi = args.u_max if args.u_max is not None else args.u_min
    steps = args.steps or 1
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if steps == 1:
        return [float(lo)]
    return [float(lo + i * (hi - lo) / (steps - 1)) for i in range(steps)]


def _load_complex(args, need_metric=True):
    data = _read_instance(args.in_path)
    c, mf = serialize.complex_from_json(data)
    if need_metric and mf is None:
        raise ValidationError("instance has no metric family")
    return c, mf


def _torsion_record(c, mf, u, ktol):
    t = torsion(c, mf, u, ktol)
    return {
        "u": float(u),
        "zeta_prime0": float(graded_zeta_prime0(c, mf, u, ktol)),
        "torsion_coeff": float(t.coefficient),
        "anomaly": float(anomaly_c(c, mf, u)),
    }


# ------------------------------------------------------------- commands

def _cmd_fkdet(args):
    t = serialize.op_from_json(_read_instance(args.in_path))
    det = fk_determinant_invertible(t, args.tol_kernel)
    return [{"det": float(det)}]


def _cmd_detline(args):
    a = serialize.op_from_json(_read_instance(args.in_path))
    e = metric_element(a)
    return [{"coefficient": float(e.coeff)}]


def _cmd_complex_validate(args):
    from .hilbert_complex import validate_complex

    c, _ = _load_complex(args, need_metric=False)
    report = validate_complex(c)
    record = {"ok": bool(report.ok), "max_violation": float(report.max_violation)}
    return [record], (0 if report.ok else 2)


def _cmd_torsion(args):
    c, mf = _load_complex(args)
    us = _sweep_values(args)
    if us is None:
        us = [args.u]
    return [_torsion_record(c, mf, u, args.tol_kernel) for u in us]


def _cmd_vary(args):
    c, mf = _load_complex(args)
    us = _sweep_values(args)
    if us is None:
        us = [args.u]
    records = []
    for u in us:
        rec = _torsion_record(c, mf, u, args.tol_kernel)
        res = variation_check(c, mf, u, args.h_step, args.tol_kernel)
        rec["gap"] = float(res.gap)
        records.append(rec)
    return records


def _cmd_relative(args):
    data = _read_instance(args.in_path)
    c1, mf1 = serialize.complex_from_json(
        serialize._field(data, "first", dict, "relative instance"))
    c2, mf2 = serialize.complex_from_json(
        serialize._field(data, "second", dict, "relative instance"))
    if mf1 is None or mf2 is None:
        raise ValidationError("both complexes need metric families")
    us = _sweep_values(args)
    if us is None:
        us = [args.u]
    records = []
    for u in us:
        te, tf, ratio = relative_torsion(c1, c2, mf1, mf2, u, args.tol_kernel)
        records.append({
            "u": float(u),
            "ratio": float(ratio),
            "first_coeff": float(te.coefficient),
            "second_coeff": float(tf.coefficient),
        })
    return records


def _cmd_holonomy(args):
    generators, relators = serialize.holonomy_from_json(_read_instance(args.in_path))
    h = rep_holonomy(generators, relators)
    return [{"values": [float(v) for v in h.generator_values],
             "consistent": bool(h.consistent)}]


def _cmd_randol(args):
    if args.genus < 1:
        raise ValidationError("genus must be an integer >= 1")
    spec = QuadratureSpec(r_max=args.rmax, abs_tol=args.tol_quad)
    if args.what == "zeta":
        res = randol_zeta(args.s, args.genus, spec)
    elif args.what == "zeta-prime":
        res = randol_zeta_prime0(args.genus, spec)
    elif args.what == "C":
        res = torsion_constant_C(spec)
    else:  # torsion
        base = torsion_constant_C(spec)
        value = surface_torsion_scalar(args.genus, args.p, spec)
        err = abs(value) * (args.genus - 1) * base.est_error
        return [{"value": float(value), "est_error": float(err),
                 "panels": int(base.panels)}]
    return [{"value": float(res.value), "est_error": float(res.est_error),
             "panels": int(res.panels)}]


def _cmd_density(args):
    data = _read_instance(args.in_path)
    d = serialize.form_matrix_from_json(
        serialize._field(data, "D", dict, "density instance"))
    l = serialize.form_matrix_from_json(
        serialize._field(data, "L", dict, "density instance"))
    z_trace = float(serialize._field(data, "z_trace", (int, float), "density instance"))
    r = float(data.get("r", args.r))
    val = adiabatic_density(d, l, z_trace, r, convention=args.convention)
    return [{"value": serialize.complex_to_pair(val)}]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fktorsion",
        description="Torsion and determinant computations on finite trace models.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--in", dest="in_path", required=True,
                            help="input instance (JSON)")
        sp.add_argument("--out", dest="out_path", default=None,
                        help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--tol-kernel", dest="tol_kernel", type=float,
                        default=KERNEL_TOL,
                        help="relative kernel cut (default %g)" % KERNEL_TOL)

    def sweep(sp):
        sp.add_argument("--u", type=float, default=0.0,
                        help="metric parameter for single evaluations")
        sp.add_argument("--u-min", dest="u_min", type=float, default=None)
        sp.add_argument("--u-max", dest="u_max", type=float, default=None)
        sp.add_argument("--steps", type=int, default=None)

    sp = sub.add_parser("fkdet", help="determinant of one operator instance")
    common(sp)
    sp.set_defaults(func=_cmd_fkdet)

    sp = sub.add_parser("detline", help="determinant-line coefficient of a metric")
    common(sp)
    sp.set_defaults(func=_cmd_detline)

    sp = sub.add_parser("complex-validate", help="check the d(d(x)) = 0 law")
    common(sp)
    sp.set_defaults(func=_cmd_complex_validate)

    sp = sub.add_parser("torsion", help="torsion element per u")
    common(sp)
    sweep(sp)
    sp.set_defaults(func=_cmd_torsion)

    sp = sub.add_parser("vary", help="variation identity gap per u")
    common(sp)
    sweep(sp)
    sp.add_argument("--h-step", dest="h_step", type=float, default=1e-4,
                    help="central difference step (default 1e-4)")
    sp.set_defaults(func=_cmd_vary)

    sp = sub.add_parser("relative", help="relative torsion ratio per u")
    common(sp)
    sweep(sp)
    sp.set_defaults(func=_cmd_relative)

    sp = sub.add_parser("holonomy", help="determinant holonomy of a representation")
    common(sp)
    sp.set_defaults(func=_cmd_holonomy)

    sp = sub.add_parser("randol", help="surface zeta constants")
    common(sp, needs_input=False)
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--what", choices=("zeta", "zeta-prime", "C", "torsion"),
                    required=True)
    sp.add_argument("--s", type=float, default=0.0, help="zeta argument")
    sp.add_argument("--p", type=int, default=0, help="degree for --what torsion")
    sp.add_argument("--rmax", type=float, default=10.0)
    sp.add_argument("--tol-quad", dest="tol_quad", type=float, default=1e-10)
    sp.set_defaults(func=_cmd_randol)

    sp = sub.add_parser("density", help="adiabatic index density")
    common(sp)
    sp.add_argument("--r", type=float, default=1.0, help="scale parameter")
    sp.add_argument("--convention", choices=("raw", "limit"), default="raw")
    sp.set_defaults(func=_cmd_density)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
        if isinstance(out, tuple):
            records, status = out
        else:
            records, status = out, 0
        _emit(records, args.format, args.out_path)
        return status
    except ConvergenceError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except TorsionError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
