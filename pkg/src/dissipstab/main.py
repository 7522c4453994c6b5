import argparse
import json
import logging
import math
import sys

import numpy as np

from .errors import (
    ConfigError,
    DegenerateInput,
    DissipStabError,
    InvalidConstraint,
    SweepGuardExceeded,
)
from .hurwitz import CLASSIFY_TOL, EXIT_CODES, classify, hurwitz_H, surface_V_sample
from .krein import collision_scan
from .models import MODEL_TYPES, create_model, maclaurin_krein_family, sobolev_krein_family
from .msystem import QuarticPoly
from .paradox import vanishing_damping_scan
from .smallalg import Poly, poly_roots
from .sweep import SweepResult, evaluate, format_cell, load_config, provenance, write_result
from .umbrella import (
    AffineConstraint,
    abscissa_min_affine,
    bottema_from_whitney,
    discriminant_swallowtail_probe,
    ep_set_sample,
    locate_swallowtail_cusp,
    whitney_surface_sample,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 64
EXIT_CONFIG = 65
EXIT_GUARD = 66
EXIT_FAILURE = 1


class ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with EXIT_USAGE instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


class UsageError(DissipStabError):
    pass


def finite_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("{!r} is not a finite number".format(text))
    return value


def positive_float(text):
    value = finite_float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("{!r} is not positive".format(text))
    return value


def parse_params(items):
    """key=value pairs; values are read as JSON when possible."""
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError("Parameter {!r} is not of the form key=value.".format(item))
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _common_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument("--out", help="File to write the table to (default stdout).")
    common.add_argument(
        "--format", default="csv", choices=["csv", "json"], help="Table format."
    )
    common.add_argument(
        "--threads",
        type=int,
        help="Worker threads (default: DISSIPSTAB_THREADS, else 1).",
    )
    common.add_argument(
        "--tol", type=positive_float, default=CLASSIFY_TOL, help="Classification tolerance."
    )
    common.add_argument("--logfile", help="File to log warnings and errors to.")
    return common


def _model_arguments(parser, choices=None):
    parser.add_argument("--model", required=True, choices=choices or sorted(MODEL_TYPES))
    parser.add_argument("--variant", help="Model variant (maclaurin).")
    parser.add_argument(
        "--param",
        action="append",
        metavar="KEY=VALUE",
        help="Model parameter, repeatable.",
    )


def build_parser():
    parser = ArgumentParser(
        prog="dissipstab",
        description="Stability analysis of nonconservative mechanical systems.",
    )
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    commands.required = True

    stability = commands.add_parser(
        "stability",
        parents=[common],
        help="Classify λ⁴ + a1λ³ + a2λ² + a3λ + a4.",
        description="Prints verdict, certificate, H and abscissa. Exit code 0 "
        "asymptotically stable, 1 unstable, 2 marginally stable.",
    )
    for name in ("a1", "a2", "a3", "a4"):
        stability.add_argument(name, type=finite_float)

    roots = commands.add_parser(
        "roots",
        parents=[common],
        help="Roots of a polynomial, highest degree first.",
        description="CSV columns: re, im, multiplicity.",
    )
    roots.add_argument("coeffs", type=finite_float, nargs="+")

    sweep = commands.add_parser(
        "sweep",
        parents=[common],
        help="Evaluate a model over a parameter grid.",
        description="CSV columns: one per axis, then verdict, abscissa, "
        "leading_re, leading_im, H, krein_signs (as requested by outputs).",
    )
    sweep.add_argument("--config", required=True, help="JSON sweep config file.")

    surface = commands.add_parser(
        "surface",
        parents=[common],
        help="Point clouds of the stability boundary and its singularities.",
        description="bottema: a1, a2, a3, kind, H; whitney: y1, y2, y3, a1, a3, a2; "
        "ep-set: a1, a2, a3, root_re, root_im, multiplicity; "
        "swallowtail: a1, a3, a2, label, abscissa.",
    )
    surface.add_argument("kind", choices=["bottema", "whitney", "ep-set", "swallowtail"])
    surface.add_argument("--count", type=int, default=21, help="Points per axis.")
    surface.add_argument(
        "--range",
        type=finite_float,
        nargs=2,
        metavar=("LOW", "HIGH"),
        help="Sampling range of the first coordinate.",
    )

    paradox = commands.add_parser(
        "paradox",
        parents=[common],
        help="Critical load as damping vanishes.",
        description="CSV columns: row, eps, onset. Rows 'scan' per damping "
        "scale, then 'extrapolated', 'undamped' and 'gap'.",
    )
    _model_arguments(paradox)
    paradox.add_argument("--eps", type=finite_float, nargs="+", required=True)
    paradox.add_argument(
        "--range", type=finite_float, nargs=2, metavar=("LOW", "HIGH"), help="Load range."
    )

    krein = commands.add_parser(
        "krein-path",
        parents=[common],
        help="Krein-signed spectrum along a parameter path.",
        description="CSV columns: row, x, value_re, value_im, multiplicity, "
        "krein_sign. Event rows carry the collision point in value_re and "
        "the merging signs in krein_sign.",
    )
    _model_arguments(krein, ["maclaurin", "sobolev"])
    krein.add_argument(
        "--range", type=finite_float, nargs=2, metavar=("LOW", "HIGH"), required=True
    )
    krein.add_argument("--count", type=int, default=41)

    abscissa = commands.add_parser(
        "abscissa-min",
        parents=[common],
        help="Minimal spectral abscissa under an affine constraint.",
    )
    abscissa.add_argument(
        "b", type=finite_float, nargs="+", help="b0 b1 ... bn of b0 + Σ bj aj = 0."
    )
    abscissa.add_argument("--field", default="real", choices=["real", "complex"])

    info = commands.add_parser(
        "model-info", parents=[common], help="Closed-form criticals of a model."
    )
    _model_arguments(info)
    return parser


def cmd_stability(args):
    q = QuarticPoly(args.a1, args.a2, args.a3, args.a4)
    verdict = classify(q, args.tol)
    lines = [
        "verdict: {}".format(verdict.stability),
        "certificate: {}".format(verdict.certificate),
        "H: {}".format(format_cell(hurwitz_H(q))),
        "abscissa: {}".format(format_cell(verdict.abscissa)),
    ]
    if verdict.detail:
        lines.append("detail: {}".format(verdict.detail))
    if verdict.imaginary_pair is not None:
        lines.append("imaginary_pair: {}".format(format_cell(verdict.imaginary_pair)))
    _print_lines(args, lines)
    return EXIT_CODES[verdict.stability]


def cmd_roots(args):
    p = Poly.from_descending(args.coeffs)
    if p.degree() < 1:
        raise UsageError("Need a polynomial of degree at least 1.")
    rows = tuple(
        (root.real, root.imag, multiplicity) for root, multiplicity in poly_roots(p)
    )
    header = (("re", ""), ("im", ""), ("multiplicity", ""))
    _write(args, SweepResult(header, rows, provenance("roots")))
    return 0


def cmd_sweep(args):
    spec = load_config(args.config)
    _write(args, evaluate(spec, args.threads, args.tol))
    return 0


def _range(args, default):
    low, high = args.range or default
    if args.count < 2:
        raise UsageError("--count must be at least 2.")
    return np.linspace(low, high, args.count)


def cmd_surface(args):
    if args.kind == "bottema":
        header = (("a1", ""), ("a2", ""), ("a3", ""), ("kind", ""), ("H", ""))
        rows = []
        m_range = args.range or (0.2, 5.0)
        for point in surface_V_sample(m_range, (0.0, 3.0), (args.count, args.count)):
            q = QuarticPoly(point.a1, point.a2, point.a3, 1.0)
            rows.append((point.a1, point.a2, point.a3, point.kind, hurwitz_H(q)))
        extra = {}
    elif args.kind == "whitney":
        header = (
            ("y1", ""), ("y2", ""), ("y3", ""), ("a1", ""), ("a3", ""), ("a2", ""),
        )
        rows = []
        values = _range(args, (-1.0, 1.0))
        for point in whitney_surface_sample(values, values):
            try:
                a1, a3, a2 = bottema_from_whitney(point)
            except DissipStabError:
                a1 = a3 = a2 = None
            rows.append((point.y1, point.y2, point.y3, a1, a3, a2))
        extra = {}
    elif args.kind == "ep-set":
        header = (
            ("a1", ""), ("a2", ""), ("a3", ""),
            ("root_re", ""), ("root_im", ""), ("multiplicity", ""),
        )
        rows = []
        for q, roots in ep_set_sample(_range(args, (0.0, 8.0))):
            for root, multiplicity in roots:
                rows.append((q.a1, q.a2, q.a3, root.real, root.imag, multiplicity))
        extra = {}
    else:
        header = (("a1", ""), ("a3", ""), ("a2", ""), ("label", ""), ("abscissa", ""))
        low, high = args.range or (3.0, 6.0)
        axis = np.linspace(low, high, args.count)
        probe = discriminant_swallowtail_probe(axis, axis, axis + 2)
        rows = [tuple(point) for point in probe]
        vertex, spread = locate_swallowtail_cusp()
        extra = {"vertex": list(vertex), "root_spread": spread}
    _write(args, SweepResult(header, tuple(rows), provenance(args.kind, **extra)))
    return 0


def _model(args):
    try:
        return create_model(args.model, parse_params(args.param), args.variant)
    except ConfigError as e:
        raise UsageError(str(e))


def cmd_paradox(args):
    model = _model(args)
    if model.DAMPING is None:
        raise UsageError("Model {} has no damping scale.".format(args.model))
    load_range = args.range or model.LOAD_RANGE
    if load_range is None:
        raise UsageError("Model {} needs --range.".format(args.model))
    table = vanishing_damping_scan(
        model.family(), tuple(load_range), args.eps, threads=args.threads
    )
    rows = [("scan", row.eps, row.onset) for row in table.rows]
    rows.append(("extrapolated", None, table.extrapolated))
    rows.append(("undamped", 0.0, table.undamped_onset))
    rows.append(("gap", None, table.gap()))
    header = (("row", ""), ("eps", ""), ("onset", model.LOAD))
    info = provenance(
        args.model, model.variant(), load=model.LOAD, damping=model.DAMPING,
        raw_limit=table.raw_limit, multiple_crossings=table.multiple_crossings,
    )
    _write(args, SweepResult(header, tuple(rows), info))
    return 0


def _sign_text(signs):
    return " ".join("{:+d}".format(sign) if sign else "0" for sign in signs)


def cmd_krein_path(args):
    if args.count < 2:
        raise UsageError("--count must be at least 2.")
    model = _model(args)
    if args.model == "sobolev":
        family = sobolev_krein_family(model.params())
        name = "c"
    else:
        family = maclaurin_krein_family
        name = "e"
    grid = np.linspace(args.range[0], args.range[1], args.count)
    path, events = collision_scan(family, grid, name)
    rows = []
    for x, entries in zip(path.grid, path.entries):
        for entry in entries:
            rows.append(
                (
                    "eigen",
                    x,
                    entry.value.real,
                    entry.value.imag,
                    entry.algebraic_multiplicity,
                    str(entry.krein_sign),
                )
            )
    for event in events:
        x = 0.5 * (event.bracket[0] + event.bracket[1])
        for value in event.values:
            rows.append((event.kind, x, value, 0.0, 2, _sign_text(event.signs_before)))
    header = (
        ("row", ""), (name, ""), ("value_re", ""), ("value_im", ""),
        ("multiplicity", ""), ("krein_sign", ""),
    )
    _write(args, SweepResult(header, tuple(rows), provenance(args.model, parameter=name)))
    return 0


def cmd_abscissa_min(args):
    constraint = AffineConstraint(tuple(args.b))
    optimum = abscissa_min_affine(constraint, args.field)
    lines = [
        "a_star: {}".format(format_cell(optimum.a_star)),
        "attained: {}".format(format_cell(optimum.attained)),
    ]
    if optimum.p_star is not None:
        coeffs = [complex(c) for c in optimum.p_star.descending()]
        if args.field == "real":
            coeffs = [c.real for c in coeffs]
        lines.append("p_star: {}".format(format_cell(coeffs)))
    _print_lines(args, lines)
    return 0


def cmd_model_info(args):
    model = _model(args)
    content = dict(model.info(), model=args.model)
    lines = [
        "{}: {}".format(key, format_cell(value)) for key, value in sorted(content.items())
    ]
    _print_lines(args, lines)
    return 0


def _print_lines(args, lines):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as out:
            out.write(text)
    else:
        sys.stdout.write(text)


def _write(args, result):
    write_result(result, args.format, path=args.out, stream=sys.stdout)


COMMANDS = {
    "stability": cmd_stability,
    "roots": cmd_roots,
    "sweep": cmd_sweep,
    "surface": cmd_surface,
    "paradox": cmd_paradox,
    "krein-path": cmd_krein_path,
    "abscissa-min": cmd_abscissa_min,
    "model-info": cmd_model_info,
}


def run(argv=None):
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)

    if args.logfile:
        logging.basicConfig(filename=args.logfile, level=logging.WARNING, filemode="w")

    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidConstraint) as e:
        sys.stderr.write("usage error: {}\n".format(e))
        return EXIT_USAGE
    except ConfigError as e:
        sys.stderr.write("config error: {}\n".format(e))
        return EXIT_CONFIG
    except SweepGuardExceeded as e:
        sys.stderr.write("{}\n".format(e))
        return EXIT_GUARD
    except DegenerateInput as e:
        sys.stderr.write("usage error: {}\n".format(e))
        return EXIT_USAGE
    except DissipStabError as e:
        logger.error(str(e))
        sys.stderr.write("error: {}\n".format(e))
        return EXIT_FAILURE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
