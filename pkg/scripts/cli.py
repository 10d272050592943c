import argparse
import json
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from app.core.berezin import (
    berezin_grid,
    berezin_quadrature,
    berezin_quadrature_many,
    fixed_point_residual,
    pluriharmonic_invariance_residual,
    probe_H_multi_smoothness,
    smoothness_limits,
)
from app.core.catalog import CATALOG
from app.core.errors import NoRootsFoundError, VerificationError
from app.core.exact_polynomials import (
    bound_excess,
    coefficients_to_json,
    compute_Qn,
    u_n_bessel_form,
    u_n_eval,
)
from app.core.exotic import (
    STANDARD_PROBES,
    exotic_config,
    find_exotic_roots,
    verify_exotic_fixed_point,
)
from app.core.kernels import normalization_residual, unit_vector_residual
from app.core.quadrature import gauss_laguerre_rule, polar_rule
from app.core.special_functions import laguerre_bessel_residual
from app.models.domain import BerezinConfig, BerezinMethod, Check, FockOrder, RunReport
from app.models.grid import GridFunction
from app.services.grid_io import read_grid, write_csv_slice, write_grid
from app.services.reports import (
    certificate_record,
    render_json,
    render_table,
    run_check,
    timed,
    verification_record,
)

logger = logging.getLogger("berezin_verifier.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_EMPTY = 3

UNIT_VECTOR_PROBES = (0j, 1 + 0j, 1 + 1j, 2j)
BESSEL_LATTICE_K = range(11)
BESSEL_LATTICE_X = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
TWO_FORM_X = (0.0, 0.5, 5.0, 20.0)
QUADRATURE_GRID_N = 64
GRID_METHOD_N = 512
GRID_TOLERANCE = 1e-5
CROSSCHECK_TOLERANCE = 1e-4
CROSSCHECK_STRIDE = 12
MULTIDIM_PROBES = ((0j, 0j), (0.5, -0.5j), (1 + 1j, 0.5), (-1, 1j))


def configure_logging() -> None:
    level = os.environ.get("BEREZIN_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, stream=sys.stderr)
    log_file = os.environ.get("BEREZIN_LOG_FILE")
    if log_file:
        handler = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=3)
        handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
        logging.getLogger("berezin_verifier").addHandler(handler)


def config_from(args: argparse.Namespace, n: int, d: int = 1, **defaults) -> BerezinConfig:
    """BerezinConfig from the shared override flags; flags win over ``defaults``."""
    flags = {
        "tolerance": args.tolerance,
        "radial_nodes": args.radial_nodes,
        "angular_nodes": args.angular_nodes,
        "truncation_radius": args.truncation_radius,
        "grid_resolution": args.grid_n,
        "grid_half_width": args.grid_r,
    }
    merged = {**defaults, **{key: value for key, value in flags.items() if value is not None}}
    return BerezinConfig.for_order(n, d, **merged)


def cmd_identities(args: argparse.Namespace, parser: argparse.ArgumentParser, report: RunReport) -> int | None:
    if not 1 <= args.n_max <= 8:
        parser.error("--n-max must lie in 1..8")
    samples = np.logspace(-3, 2, 200)
    for n in range(1, args.n_max + 1):
        cfg = config_from(args, n)
        order = FockOrder(n=n)
        sym = compute_Qn(n)
        report.checks.append(
            run_check(f"Q_{n}(0) exact", 1.0, 0.0, lambda sym=sym: float(sym.q_poly.coefficient(0)))
        )
        report.checks.append(
            run_check(
                f"normalization n={n}",
                0.0,
                1e-10,
                lambda order=order, cfg=cfg: normalization_residual(order, gauss_laguerre_rule(cfg.radial_nodes)),
            )
        )
        for z in UNIT_VECTOR_PROBES:
            report.checks.append(
                run_check(
                    f"unit vector n={n} z={z}",
                    0.0,
                    1e-9,
                    lambda order=order, z=z, cfg=cfg: unit_vector_residual(
                        order, z, polar_rule(cfg.radial_nodes, cfg.angular_nodes)
                    ),
                )
            )
        report.checks.append(
            run_check(f"u_{n} bound excess", 0.0, 0.0, lambda sym=sym: bound_excess(sym, samples))
        )
        if n <= 4:
            for x in TWO_FORM_X:
                report.checks.append(
                    run_check(
                        f"u_{n} two forms x={x:g}",
                        0.0,
                        1e-8,
                        lambda sym=sym, x=x: abs(u_n_eval(sym, x) - u_n_bessel_form(sym, x)),
                    )
                )
    report.checks.append(
        run_check(
            "Laguerre-Bessel lattice max residual",
            0.0,
            1e-8,
            lambda: max(laguerre_bessel_residual(k, x) for k in BESSEL_LATTICE_K for x in BESSEL_LATTICE_X),
        )
    )
    return None


def cmd_qn(args: argparse.Namespace, parser: argparse.ArgumentParser, report: RunReport) -> int | None:
    if not 1 <= args.n <= 12:
        parser.error("--n must lie in 1..12")
    q = compute_Qn(args.n).q_poly
    report.results["coefficients"] = coefficients_to_json(q)
    report.checks.append(run_check("constant term", 1.0, 0.0, lambda: float(q.coefficient(0))))
    report.checks.append(run_check("degree", float(2 * (args.n - 1)), 0.0, lambda: float(q.degree)))
    return None


def _crosscheck_probes(grid: GridFunction) -> list[complex]:
    axis = grid.axis()
    centre = grid.resolution // 2
    picks = [centre + CROSSCHECK_STRIDE * k for k in range(-2, 3)]
    return [complex(axis[i], axis[j]) for j in picks for i in picks]


def _berezin_crosscheck(args: argparse.Namespace, n: int, f, report: RunReport) -> None:
    base = config_from(args, n, grid_resolution=GRID_METHOD_N)
    grid_cfg = base.model_copy(update={"method": BerezinMethod.GRID_CONVOLUTION})
    fft_cfg = base.model_copy(update={"method": BerezinMethod.MULTIPLIER})
    convolved = berezin_grid(grid_cfg, f)
    multiplied = berezin_grid(fft_cfg, f)
    probes = _crosscheck_probes(convolved)
    quadrature = berezin_quadrature_many(base, f, probes)
    conv = np.array([convolved.value_at(p) for p in probes])
    mult = np.array([multiplied.value_at(p) for p in probes])
    pairs = {
        "quadrature vs grid_convolution": (quadrature, conv),
        "quadrature vs multiplier": (quadrature, mult),
        "grid_convolution vs multiplier": (conv, mult),
    }
    for name, (left, right) in pairs.items():
        report.checks.append(
            run_check(name, 0.0, CROSSCHECK_TOLERANCE, lambda left=left, right=right: float(np.max(np.abs(left - right))))
        )


def cmd_berezin(args: argparse.Namespace, parser: argparse.ArgumentParser, report: RunReport) -> int | None:
    method = BerezinMethod(args.method)
    default_n = QUADRATURE_GRID_N if method == BerezinMethod.QUADRATURE else GRID_METHOD_N
    cfg = config_from(args, args.n, method=method, grid_resolution=default_n)
    function = CATALOG.get(args.input)
    if function is None:
        if method == BerezinMethod.QUADRATURE:
            parser.error("grid file input needs --method grid_convolution or multiplier")
        if args.crosscheck:
            parser.error("--crosscheck needs a catalog function")
        source = read_grid(Path(args.input))
    else:
        if args.crosscheck and not function.decaying:
            parser.error(f"--crosscheck needs a decaying function; {function.name!r} is not")
        source = function
    output = berezin_grid(cfg, source)

    if args.output:
        out_path = Path(args.output)
        write_grid(out_path, output)
        csv_path = Path(args.csv) if args.csv else out_path.with_suffix(".csv")
        write_csv_slice(csv_path, output, args.csv_row)
        report.results["output"] = str(out_path)
        report.results["csv"] = str(csv_path)
    report.results["grid"] = {"half_width": output.half_width, "resolution": output.resolution}

    if function is not None and function.expected(args.n, 0j) is not None:
        band = 0.0 if method == BerezinMethod.QUADRATURE else cfg.truncation_radius
        tolerance = cfg.tolerance if method == BerezinMethod.QUADRATURE else GRID_TOLERANCE
        mask = output.interior_mask(band)
        expected = np.asarray(function.expected(args.n, output.points()))
        report.checks.append(
            run_check(
                "max |B_n f - expected| on reliable cells",
                0.0,
                tolerance,
                lambda: float(np.max(np.abs(output.values - expected)[mask])),
            )
        )
    if function is not None and function.name == "abs2":
        quad_cfg = cfg.model_copy(update={"method": BerezinMethod.QUADRATURE})
        report.checks.append(
            run_check(
                "|B_n f(0) - f(0)|",
                1.0,
                1e-8,
                lambda: abs(berezin_quadrature(quad_cfg, function, 0j) - complex(function(0j))),
            )
        )
    if args.crosscheck:
        _berezin_crosscheck(args, args.n, function, report)
    return None


def cmd_exotic(args: argparse.Namespace, parser: argparse.ArgumentParser, report: RunReport) -> int | None:
    if not 1 <= args.n <= 6:
        parser.error("--n must lie in 1..6")
    if args.search_radius <= 0:
        parser.error("--search-radius must be positive")
    try:
        certificates = find_exotic_roots(args.n, args.search_radius, args.max_roots)
    except NoRootsFoundError as exc:
        logger.info("%s", exc)
        report.results["certificates"] = []
        return EXIT_EMPTY

    records, verifications = [], []
    for index, cert in enumerate(certificates):
        records.append(certificate_record(cert))
        report.checks.append(
            run_check(f"root {index} residual", 0.0, 1e-10, lambda cert=cert: cert.residual)
        )
        overrides = {
            "radial_nodes": args.radial_nodes,
            "angular_nodes": args.angular_nodes,
            "truncation_radius": args.truncation_radius,
            "tolerance": args.tolerance,
        }
        try:
            result = verify_exotic_fixed_point(
                args.n, cert, STANDARD_PROBES, exotic_config(args.n, cert.a, **overrides)
            )
        except VerificationError as exc:
            logger.warning("Verification of root %d failed: %s", index, exc)
            report.checks.append(Check(name=f"root {index} fixed point", expected=0.0, tolerance=1e-6, error=str(exc)))
            continue
        verifications.append(verification_record(result))
        tolerance = 1e-6 if result.quadrature_residual is not None else 1e-5
        report.checks.append(
            run_check(f"root {index} fixed point", 0.0, tolerance, lambda result=result: result.fixed_point_residual)
        )
        report.checks.append(
            run_check(f"root {index} eigen relation", 0.0, 1e-6, lambda result=result: result.laplacian_residual)
        )
    report.results["certificates"] = records
    report.results["verifications"] = verifications
    if args.certificates:
        Path(args.certificates).write_text(json.dumps(records, indent=2, sort_keys=True), encoding="utf-8")
    return None


def cmd_multidim(args: argparse.Namespace, parser: argparse.ArgumentParser, report: RunReport) -> int | None:
    if args.d != 2:
        parser.error("multidim runs in dimension d = 2 only")
    if not 1 <= args.n <= 3:
        parser.error("--n must lie in 1..3")
    cfg = config_from(args, args.n, d=2, radial_nodes=24, angular_nodes=16)
    report.checks.append(
        run_check(
            "pluriharmonic Re(z1 z2)",
            0.0,
            1e-8,
            lambda: pluriharmonic_invariance_residual(cfg, lambda z1, z2: np.real(z1 * z2), MULTIDIM_PROBES),
        )
    )
    report.checks.append(
        run_check(
            "constant 1",
            0.0,
            1e-12,
            lambda: pluriharmonic_invariance_residual(cfg, lambda z1, z2: np.ones_like(z1), MULTIDIM_PROBES),
        )
    )
    report.checks.append(
        run_check(
            "|z1|^2 at origin",
            1.0,
            1e-8,
            lambda: fixed_point_residual(cfg, lambda z1, z2: np.abs(z1) ** 2, [(0j, 0j)]),
        )
    )
    smoothness = probe_H_multi_smoothness(args.n, args.d)
    axis, diagonal = smoothness_limits(args.n, args.d)
    report.results["smoothness"] = smoothness.model_dump()
    report.checks.append(run_check("H axis limit", axis, 1e-6, lambda: smoothness.axis_limit))
    report.checks.append(run_check("H diagonal limit", diagonal, 1e-6, lambda: smoothness.diagonal_limit))
    report.checks.append(run_check("H directional gap", abs(axis - diagonal), 1e-6, lambda: smoothness.gap))
    if args.n >= 2:
        report.checks.append(
            run_check("H gap exceeds 0.01", 1.0, 0.0, lambda: float(smoothness.gap > 0.01))
        )
    return None


COMMANDS = {
    "identities": cmd_identities,
    "qn": cmd_qn,
    "berezin": cmd_berezin,
    "exotic": cmd_exotic,
    "multidim": cmd_multidim,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--tolerance", type=float, default=None, help="Quadrature convergence tolerance")
    shared.add_argument("--radial-nodes", type=int, default=None, help="Gauss–Laguerre radial nodes")
    shared.add_argument("--angular-nodes", type=int, default=None, help="Trapezoid angular nodes")
    shared.add_argument("--truncation-radius", type=float, default=None, help="Support cut-off for b_n")
    shared.add_argument("--grid-n", type=int, default=None, help="Samples per grid axis")
    shared.add_argument("--grid-r", type=float, default=None, help="Grid half-width R")
    shared.add_argument("--format", choices=["json", "table"], default="json", help="Report rendering")

    parser = argparse.ArgumentParser(description="Berezin transform verification toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    identities = commands.add_parser("identities", parents=[shared], help="Run the identity suite")
    identities.add_argument("--n-max", type=int, default=4, help="Largest polyanalytic order")

    qn = commands.add_parser("qn", parents=[shared], help="Exact coefficients of Q_n")
    qn.add_argument("--n", type=int, required=True)

    berezin = commands.add_parser("berezin", parents=[shared], help="Apply B_n to a function")
    berezin.add_argument("--n", type=int, required=True)
    berezin.add_argument("--method", choices=[m.value for m in BerezinMethod], default=BerezinMethod.QUADRATURE.value)
    berezin.add_argument("--input", required=True, help=f"Catalog name ({', '.join(CATALOG)}) or BGF1 file")
    berezin.add_argument("--output", default=None, help="BGF1 file for B_n f")
    berezin.add_argument("--csv", default=None, help="CSV slice path (defaults next to --output)")
    berezin.add_argument("--csv-row", type=int, default=None, help="Grid row for the CSV slice (default N//2)")
    berezin.add_argument("--crosscheck", action="store_true", help="Compare all three methods at interior probes")

    exotic = commands.add_parser("exotic", parents=[shared], help="Find and verify exotic fixed points")
    exotic.add_argument("--n", type=int, required=True)
    exotic.add_argument("--search-radius", type=float, default=30.0)
    exotic.add_argument("--max-roots", type=int, default=None)
    exotic.add_argument("--certificates", default=None, help="Write root certificates to this JSON file")

    multidim = commands.add_parser("multidim", parents=[shared], help="Pluriharmonic and smoothness checks")
    multidim.add_argument("--n", type=int, required=True)
    multidim.add_argument("--d", type=int, default=2)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    parameters = {key: value for key, value in vars(args).items() if key not in {"command", "format"}}
    report = RunReport(command=args.command, parameters=parameters)
    logger.info("Running %s with %s", args.command, parameters)

    try:
        with timed(report):
            override = COMMANDS[args.command](args, parser, report)
    except ValidationError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FAILED
    except VerificationError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED

    print(render_table(report) if args.format == "table" else render_json(report))
    if override is not None:
        return override
    code = EXIT_OK if report.passed else EXIT_FAILED
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
