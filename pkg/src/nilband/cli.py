"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
configuration errors. Reports are JSON on stdout (sorted keys); curves are
CSV. Thread count comes from ``--threads`` or ``NILBAND_THREADS`` (flag wins)
and never changes the output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import LieAlgebraSpec, SpecError, load_spec, validate
from .fixtures import FIXTURE_NAMES, load_fixture
from .poly import homogeneity_degree

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing helpers

def resolve_spec(text: str) -> LieAlgebraSpec:
    """A path to a JSON file, or a bundled fixture name (optionally 'fixtures/<name>')."""
    path = Path(text)
    if path.is_file():
        return load_spec(path)
    name = path.name[:-5] if path.name.endswith(".json") else path.name
    if name in FIXTURE_NAMES and (len(path.parts) == 1 or path.parent.name == "fixtures"):
        return load_fixture(name)
    raise UsageError(f"no such spec file or fixture: {text}")


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from exc


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from exc


def parse_grid(text: str, d: int):
    from .representation import Grid

    vals = parse_floats(text, "--grid")
    if len(vals) != 2:
        raise UsageError("--grid expects T,Q")
    T, q = vals
    if T != int(T) or q != int(q) or T < 1 or q < 2:
        raise UsageError("--grid expects integers T >= 1 and Q >= 2")
    return Grid(d=d, T=int(T), q=int(q))


def thread_count(flag: int | None) -> int:
    if flag is not None:
        value = flag
    else:
        env = os.environ.get("NILBAND_THREADS", "").strip()
        try:
            value = int(env) if env else 1
        except ValueError as exc:
            raise UsageError(f"NILBAND_THREADS must be an integer, got {env!r}") from exc
    if value < 1:
        raise UsageError("thread count must be positive")
    return value


def _lambda(args, spec) -> list[float]:
    lam = parse_floats(args.lam, "--lambda")
    if len(lam) != spec.c:
        raise UsageError(f"--lambda needs {spec.c} values for this algebra")
    return lam


# ---------------------------------------------------------------- reporting

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit_report(results: dict, args, out_dir: Path | None, name: str,
                csv_rows: list | None = None, csv_header: list | None = None,
                stream=None) -> None:
    """Write the JSON report (and optional CSV) deterministically."""
    stream = sys.stdout if stream is None else stream
    report = {"tool": "nilband", "version": __version__, "command": args.command,
              "config": _config_echo(args), **results}
    text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    stream.write(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{name}.json").write_text(text)
        if csv_rows is not None:
            (out_dir / f"{name}.csv").write_text(format_csv(csv_header, csv_rows))


def _config_echo(args) -> dict:
    skip = {"func", "threads", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def format_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    spec = resolve_spec(args.spec)
    report = validate(spec)
    emit_report({"spec": spec.name, "n": spec.n, "d": spec.d, "pass": report.passed,
                 "checks": report.as_dict(), "det_S": str(report.det_s)},
                args, args.out, "validate")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_detpoly(args) -> int:
    from .poly import det_of_central_matrix
    from .algebra import s_matrix_symbolic

    spec = resolve_spec(args.spec)
    det = det_of_central_matrix(s_matrix_symbolic(spec), nvars=spec.c)
    terms = [{"exponents": list(e), "coefficient": str(c)} for e, c in det.terms.items()]
    deg = homogeneity_degree(det)
    emit_report({"spec": spec.name, "det_S": str(det), "terms": terms,
                 "homogeneity_degree": deg}, args, args.out, "detpoly")
    return EXIT_OK if det and deg == spec.d else EXIT_FAIL


def cmd_region(args) -> int:
    from .spectra import region_table

    spec = resolve_spec(args.spec)
    if args.q < 2:
        raise UsageError("--q must be at least 2")
    table = region_table(spec, args.q)
    header = [f"lambda{k + 1}" for k in range(spec.c)] + ["det", "norm", "in_E", "in_K",
                                                          "in_Q", "in_I"]
    rows = [list(table["lam"][i]) + [table["det"][i], table["norm"][i], table["in_E"][i],
                                      table["in_K"][i], table["in_Q"][i], table["in_I"][i]]
            for i in range(len(table["lam"]))]
    text = format_csv(header, rows)
    sys.stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "region.csv").write_text(text)
    return EXIT_OK


def cmd_measure(args) -> int:
    from .spectra import measure_of_I

    spec = resolve_spec(args.spec)
    if args.q < 2:
        raise UsageError("--q must be at least 2")
    res = measure_of_I(spec, args.q)
    emit_report({"spec": spec.name, "m_I": res["lebesgue_m"], "mu_I": res["mu"], "q": args.q},
                args, args.out, "measure")
    return EXIT_OK if res["lebesgue_m"] > 0 else EXIT_FAIL


def _frame_at(spec, lam, grid, seed):
    from .frames import frame_bounds, lattice_operator, parseval_certify
    from .spectra import region_flags

    flags = region_flags(spec, lam)
    if flags.in_I:
        return parseval_certify(spec, lam, grid, seed=seed).as_dict(), True
    op = lattice_operator(spec, lam, grid)
    rep = frame_bounds(op, seed=seed).as_dict()
    rep["lambda"] = list(lam)
    rep["note"] = "lambda outside I: bounds of the lattice system, no certificate"
    return rep, False


def cmd_frame_check(args) -> int:
    from .bandlimited import spectral_quadrature
    from .representation import Grid

    spec = resolve_spec(args.spec)
    grid = parse_grid(args.grid, spec.d) if args.grid else Grid(spec.d)
    threads = thread_count(args.threads)
    if not args.sweep:
        lam = _lambda(args, spec)
        rep, in_i = _frame_at(spec, lam, grid, args.seed)
        emit_report({"spec": spec.name, "in_I": in_i, "report": rep}, args, args.out, "frame")
        return EXIT_OK if rep["verdict"] == "parseval" and in_i else EXIT_FAIL
    quad = spectral_quadrature(spec, args.q_lambda)
    lams = [list(map(float, row)) for row in quad.nodes]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda lam: _frame_at(spec, lam, grid, args.seed)[0], lams))
    header = [f"lambda{k + 1}" for k in range(spec.c)] + ["A", "B", "verdict"]
    rows = [lam + [r["A"], r["B"], r["verdict"]] for lam, r in zip(lams, results)]
    text = format_csv(header, rows)
    sys.stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "frame_sweep.csv").write_text(text)
    return EXIT_OK if all(r["verdict"] == "parseval" for r in results) else EXIT_FAIL


def cmd_intertwine(args) -> int:
    from .frames import intertwining_regression
    from .representation import Grid, GridFunction

    spec = resolve_spec(args.spec)
    lam = _lambda(args, spec)
    grid = parse_grid(args.grid, spec.d) if args.grid else Grid(spec.d, T=8, q=4 if spec.d > 2 else 8)
    rng = np.random.default_rng(args.seed)
    vals = np.zeros(grid.shape, dtype=complex)
    core = grid.cube_indicator()
    vals[core] = rng.normal(size=int(core.sum())) + 1j * rng.normal(size=int(core.sum()))
    dev = intertwining_regression(spec, lam, GridFunction(grid, vals), args.box)
    ok = dev <= args.tol
    emit_report({"spec": spec.name, "lambda": lam, "max_deviation": dev, "tolerance": args.tol,
                 "pass": ok}, args, args.out, "intertwine")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample_reconstruct(args) -> int:
    from .bandlimited import (constant_u_field, default_probes, parseval_LGamma_check,
                              random_band_limited, reconstruction_error, spectral_quadrature,
                              synthesize_admissible_f)
    from .spectra import measure_of_I

    spec = resolve_spec(args.spec)
    radii = parse_ints(args.R, "--R")
    if not radii or min(radii) < 0:
        raise UsageError("--R needs nonnegative integers")
    grid = parse_grid(args.grid, spec.d)
    quad = spectral_quadrature(spec, args.q_lambda)
    if quad.size == 0:
        raise UsageError("the quadrature of I is empty at this resolution")
    ufield = constant_u_field(quad, grid)
    f = synthesize_admissible_f(spec, quad, ufield)
    rng = np.random.default_rng(args.seed)
    h = f if args.h == "f" else random_band_limited(f, rng)
    probes = default_probes(spec, grid, seed=args.seed)
    ratios = [parseval_LGamma_check(f, h, R) for R in radii]
    err = reconstruction_error(h, f, radii, probes)
    results = {"spec": spec.name, "f_norm_sq": f.norm_sq(),
               "mu_I": measure_of_I(spec, args.q_lambda)["mu"], "h": args.h,
               "parseval_ratios": dict(zip(map(str, radii), ratios)),
               "reconstruction_errors": dict(zip(map(str, radii), err["errors"])),
               "probe_count": len(probes)}
    rows = [[R, r, e] for R, r, e in zip(radii, ratios, err["errors"])]
    emit_report(results, args, args.out, "sample_reconstruct", rows, ["R", "parseval_ratio",
                                                                     "rel_l2_error"])
    monotone = all(b <= a + 1e-12 for a, b in zip(err["errors"], err["errors"][1:]))
    return EXIT_OK if monotone else EXIT_FAIL


def cmd_dump_window(args) -> int:
    from .representation import Grid, save_grid_function, window_phi

    spec = resolve_spec(args.spec)
    lam = _lambda(args, spec)
    grid = parse_grid(args.grid, spec.d) if args.grid else Grid(spec.d)
    phi = window_phi(spec, lam, grid)
    target = Path(args.path)
    target.parent.mkdir(parents=True, exist_ok=True)
    manifest = save_grid_function(phi, target, {"spec": spec.name, "lambda": lam,
                                                "version": __version__})
    emit_report({"spec": spec.name, "lambda": lam, "binary": str(target),
                 "manifest": str(manifest)}, args, None, "dump")
    return EXIT_OK


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nilband", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nilband {__version__}")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: NILBAND_THREADS or 1)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=None, help="directory for report files")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate", help="check the structural assumptions")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("detpoly", help="print det S as a polynomial")
    p.add_argument("spec")
    p.set_defaults(func=cmd_detpoly)

    p = sub.add_parser("region", help="CSV of region flags on the lambda grid")
    p.add_argument("spec")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("measure", help="Lebesgue and Plancherel measure of I")
    p.add_argument("spec")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("frame-check", help="frame bounds of the window system")
    p.add_argument("spec")
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--grid", default=None, help="T,Q")
    p.add_argument("--q-lambda", dest="q_lambda", type=int, default=4)
    p.set_defaults(func=cmd_frame_check)

    p = sub.add_parser("intertwine", help="compare pi_lambda(Gamma_1) with the Gabor family")
    p.add_argument("spec")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--box", type=int, default=3)
    p.add_argument("--grid", default=None, help="T,Q")
    p.add_argument("--tol", type=float, default=1e-11)
    p.set_defaults(func=cmd_intertwine)

    p = sub.add_parser("sample-reconstruct", help="Parseval ratios and reconstruction errors")
    p.add_argument("spec")
    p.add_argument("--R", required=True, help="comma-separated radii")
    p.add_argument("--q-lambda", dest="q_lambda", type=int, required=True)
    p.add_argument("--grid", required=True, help="T,Q")
    p.add_argument("--h", choices=("f", "random"), default="f")
    p.set_defaults(func=cmd_sample_reconstruct)

    p = sub.add_parser("dump-window", help="write the window as a binary grid function")
    p.add_argument("spec")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--grid", default=None, help="T,Q")
    p.add_argument("--path", required=True)
    p.set_defaults(func=cmd_dump_window)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "frame-check" and not args.sweep and args.lam is None:
            raise UsageError("frame-check needs --lambda or --sweep")
        thread_count(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"nilband: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        print(f"nilband: spec error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nilband: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
