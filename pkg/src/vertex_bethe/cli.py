"""Command-line front end: ``vertex-bethe verify | bethe-solve | tabulate``.

Exit codes: 0 success, 1 a gating check failed, 2 usage or configuration
error (including out-of-domain grids), 3 the Bethe solver did not converge.
Output is deterministic for a given configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import thermo as th
from .bethe import conjecture_congruences, parity_measure, solve_bethe, sum_rule_check
from .config import FORMATS, RunConfig, load_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateSolutionError,
    DimensionError,
    DomainError,
    PreconditionError,
    SingularGaugeError,
    VertexBetheError,
)
from .suites import SUITES, density_truncations, run_suite
from .transfer import ModelContext, bethe_vector_algebraic, eigenvalue_t

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3
QUANTITIES = ("free_energy", "densities", "smatrix", "s_vs_r")
THREADS_ENV = "VERTEX_BETHE_THREADS"


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML configuration file")
    p.add_argument("--format", choices=FORMATS, dest="output_format", help="output format (default json)")
    p.add_argument("--out", metavar="PATH", dest="output_path", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, help="seed for random test points")
    p.add_argument("--ell", type=float, help="spin l (a multiple of 1/2)")
    p.add_argument("--r", type=int, help="denominator r of eta = r'/r (even)")
    p.add_argument("--r-prime", type=int, dest="r_prime", help="numerator r' of eta = r'/r (odd)")
    p.add_argument("--t", type=float, help="modulus tau = i/t")
    p.add_argument("--n-sites", type=int, dest="N", help="number of sites N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vertex-bethe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    _add_common(v)

    b = sub.add_parser("bethe-solve", help="solve the Bethe equations and report the solution")
    b.add_argument("--nu", type=int, default=0)
    b.add_argument("--quantum-numbers", dest="quantum_numbers", help="comma-separated string quantum numbers")
    b.add_argument("--init", default="string", help='"string", "random" or comma-separated complex roots')
    b.add_argument("--max-iter", type=int, default=200, dest="max_iter")
    b.add_argument("--tol", type=float, default=1e-12)
    _add_common(b)

    t = sub.add_parser("tabulate", help="tabulate a thermodynamic quantity on a grid")
    t.add_argument("quantity", choices=QUANTITIES)
    t.add_argument("--grid", metavar="lo:hi:n", help="evenly spaced grid, endpoints included")
    _add_common(t)
    return parser


def _glue_grid(argv: Sequence[str]) -> list[str]:
    """Let ``--grid -0.4:0.4:9`` through argparse, which would read the value as an option."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append("--grid" if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must look like lo:hi:n, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid must look like lo:hi:n, got {spec!r}") from exc
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"grid needs finite endpoints and n >= 1, got {spec!r}")
    return np.linspace(lo, hi, n)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _sweep(func: Callable[[float], Any], xs: np.ndarray) -> list[Any]:
    """Evaluate over a grid, in parallel when allowed; results keep grid order."""
    n = min(thread_count(), len(xs))
    if n <= 1:
        return [func(float(x)) for x in xs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, [float(x) for x in xs]))


# ---------------------------------------------------------------------------
# output


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else repr(val)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dump_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit(cfg: RunConfig, metadata: dict, columns: Sequence[str], rows: list[dict], extra: dict | None = None) -> None:
    """JSON: {"metadata", "rows", ...}.  CSV: the bare table; metadata goes to PATH.meta.json with --out."""
    if cfg.output_format == "json":
        doc = {"metadata": metadata, "rows": rows}
        doc.update(extra or {})
        _write(dump_json(doc), cfg.output_path)
        return
    _write(dump_csv(columns, rows), cfg.output_path)
    if cfg.output_path is not None:
        meta = dict(metadata)
        meta.update(extra or {})
        _write(dump_json(meta), cfg.output_path + ".meta.json")


def metadata(cfg: RunConfig, command: str, **extra: Any) -> dict:
    p = cfg.model
    meta = {
        "command": command,
        "version": __version__,
        "params": {
            "two_ell": p.two_ell,
            "ell": p.ell,
            "t": p.t,
            "r": p.r,
            "r_prime": p.r_prime,
            "N": p.N,
            "eta": p.eta,
        },
        "params_explicit": cfg.model_explicit,
        "gauge": {"s_plus": cfg.gauge.s_plus, "s_minus": cfg.gauge.s_minus},
        "seed": cfg.seed,
        "s_normalization": th.S_NORMALIZATION,
    }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    reports = run_suite(suite, cfg.suite_settings())
    rows = []
    for rep in reports:
        for c in rep.checks:
            row = {"suite": rep.suite}
            row.update(c.as_dict())
            rows.append(row)
    passed = all(r.passed for r in reports)
    columns = ["suite", "name", "tag", "residual", "relation", "threshold", "gating", "passed"]
    meta = metadata(cfg, "verify", suite=suite, tolerances=cfg.tolerances)
    extra = {"passed": passed, "notes": {rep.suite: rep.notes for rep in reports if rep.notes}}
    emit(cfg, meta, columns, rows, extra)
    n_fail = sum(len(r.failures()) for r in reports)
    print(f"verify {suite}: {len(rows)} checks, {n_fail} failed", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def _parse_roots(spec: str) -> list[complex]:
    try:
        roots = [complex(tok.strip().replace(" ", "")) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot read initial roots from {spec!r}") from exc
    if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in roots):
        raise ConfigError(f"initial roots must be finite, got {spec!r}")
    return roots


def _parse_floats(spec: str | None) -> list[float] | None:
    if spec is None:
        return None
    try:
        return [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot read quantum numbers from {spec!r}") from exc


def cmd_bethe_solve(cfg: RunConfig, args: argparse.Namespace) -> int:
    p = cfg.model
    init: Any = args.init if args.init in ("string", "random") else _parse_roots(args.init)
    try:
        sol = solve_bethe(
            p,
            nu=args.nu,
            init=init,
            quantum_numbers=_parse_floats(args.quantum_numbers),
            tol=args.tol,
            max_iter=args.max_iter,
            seed=cfg.seed,
        )
    except (ConvergenceError, DegenerateSolutionError) as exc:
        trace = list(getattr(exc, "trace", []) or [])
        doc = {
            "metadata": metadata(cfg, "bethe-solve", init=args.init, nu=args.nu),
            "error": {"type": type(exc).__name__, "message": str(exc), "newton_trace": trace},
        }
        _write(dump_json(doc), cfg.output_path)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV

    rng = np.random.default_rng(cfg.seed)
    samples = rng.uniform(-0.5, 0.5, 3) + 1j * rng.uniform(-0.4, 0.4, 3) * p.tau.imag
    n0, n1, dev = sum_rule_check(p, sol.lambdas)
    roots = np.asarray(sol.lambdas)
    symmetric = bool(np.max(np.abs(np.sort_complex(roots) - np.sort_complex(-roots))) < 1e-8)
    try:
        ctx = ModelContext(p, cfg.gauge, seed=cfg.seed)
        state = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        rep = conjecture_congruences(p, sol.nu, sol.lambdas, parity_measure(ctx, state))
        parities: dict | None = {
            "nu_doubleprime": rep.nu_doubleprime,
            "nu_prime": rep.nu_prime,
            "residuals": list(rep.residuals),
            "indeterminate": rep.indeterminate,
            "congruence_1": rep.congruence_1,
            "congruence_2": rep.congruence_2,
        }
    except DimensionError as exc:
        parities = {"skipped": str(exc)}

    rows = [
        {"index": j, "re": float(z.real), "im": float(z.imag)} for j, z in enumerate(sol.lambdas)
    ]
    report = {
        "nu": sol.nu,
        "roots": list(sol.lambdas),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "branch_ints": sol.branch_ints,
        "quantum_numbers": sol.quantum_numbers,
        "reductions": [list(r) for r in sol.reductions],
        "sum_rule": {"n0": n0, "n1": n1, "deviation": dev, "tag": "sumrule:thm"},
        "symmetric_about_zero": symmetric,
        "eigenvalue_samples": [
            {"lambda": lam, "t": eigenvalue_t(p, sol.nu, sol.lambdas, lam), "tag": "t eigenvalue"} for lam in samples
        ],
        "parities": parities,
    }
    meta = metadata(cfg, "bethe-solve", init=args.init, nu=args.nu)
    emit(cfg, meta, ["index", "re", "im"], rows, {"solution": report})
    return EXIT_OK


def _check_domain(xs: np.ndarray, ok: Callable[[float], bool], what: str) -> None:
    bad = [float(x) for x in xs if not ok(float(x))]
    if bad:
        raise DomainError(f"grid points outside {what}: {', '.join(repr(b) for b in bad)}")


def _tab_free_energy(cfg: RunConfig, xs: np.ndarray):
    p = cfg.model
    _check_domain(xs, lambda v: 0 < v < 2 * p.eta, f"0 < lambda < 2 eta = {2 * p.eta!r}")

    def row(lam: float) -> dict:
        return {
            "lambda": lam,
            "minus_beta_f": th.free_energy(p, lam),
            "quadrature": th.free_energy_quadrature(p, lam),
            "tag": "free energy",
        }

    note = "minus_beta_f is defined up to a lambda-independent constant; the quadrature column carries a different one"
    return ["lambda", "minus_beta_f", "quadrature", "tag"], _sweep(row, xs), {"constant_note": note}


def _tab_densities(cfg: RunConfig, xs: np.ndarray):
    p = cfg.model
    _check_domain(xs, lambda v: -0.5 <= v <= 0.5, "[-1/2, 1/2]")
    rho = th.ground_density(p)
    dens = th.excitation_densities(p).as_dict()
    names = ["rho", *dens]
    funcs = {"rho": rho, **dens}
    rows = [{"x": float(x), **{n: float(funcs[n](float(x))) for n in names}} for x in xs]
    info = {"truncations": density_truncations(p), "sigma_note": "sigma column is the regular part (sigma + delta)"}
    return ["x", *names], rows, info


def _tab_smatrix(cfg: RunConfig, xs: np.ndarray):
    p = cfg.model
    _check_domain(xs, lambda v: -1 < v < 1, "-1 < x < 1")

    def row(x: float) -> dict:
        out: dict[str, Any] = {"x": x}
        for v in th.VARIANTS:
            s = th.s_matrix_eigenvalue(p, v, x)
            out[f"{v}_re"], out[f"{v}_im"] = s.real, s.imag
        return out

    cols = ["x"] + [f"{v}_{part}" for v in th.VARIANTS for part in ("re", "im")]
    return cols, _sweep(row, xs), {"variants": list(th.VARIANTS)}


def _tab_s_vs_r(cfg: RunConfig, xs: np.ndarray):
    p = cfg.model
    _check_domain(xs, lambda v: -1 < v < 1, "-1 < x < 1")
    tp, ep = th.modified_r_params(p)

    def row(x: float) -> dict:
        return {"x": x, "spread": th.s_vs_r_check(p, [x]), "tag": "spec(S) / spec(R)"}

    return ["x", "spread", "tag"], _sweep(row, xs), {"r_modulus_t": tp, "r_eta": ep}


_TABULATORS = {
    "free_energy": (_tab_free_energy, None),
    "densities": (_tab_densities, "-0.5:0.5:201"),
    "smatrix": (_tab_smatrix, "-0.4:0.4:9"),
    "s_vs_r": (_tab_s_vs_r, "-0.4:0.4:9"),
}


def cmd_tabulate(cfg: RunConfig, quantity: str, grid_spec: str | None) -> int:
    func, default = _TABULATORS[quantity]
    if grid_spec is None:
        grid_spec = default if default is not None else f"{0.1 * cfg.model.eta!r}:{1.9 * cfg.model.eta!r}:19"
    xs = parse_grid(grid_spec)
    columns, rows, info = func(cfg, xs)
    meta = metadata(cfg, "tabulate", quantity=quantity, grid=grid_spec, **info)
    emit(cfg, meta, columns, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_grid(argv))
    overrides = {
        "ell": args.ell,
        "r": args.r,
        "r_prime": args.r_prime,
        "t": args.t,
        "N": args.N,
        "seed": args.seed,
        "output_format": args.output_format,
        "output_path": args.output_path,
    }
    try:
        thread_count()
        cfg = load_config(args.config, overrides)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        if args.command == "bethe-solve":
            return cmd_bethe_solve(cfg, args)
        return cmd_tabulate(cfg, args.quantity, args.grid)
    except (ConfigError, DomainError, PreconditionError, DimensionError, SingularGaugeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VertexBetheError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
