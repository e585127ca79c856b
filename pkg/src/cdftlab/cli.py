"""Command-line front end: config parsing, orchestration, report export.

Subcommands
-----------
solve            eigenpairs + density fields for the configured (V, A)
counterexample   two-field family, eps sweep, verdict table
functional       evaluate the functionals on externally supplied fields

Exit codes: 0 success; 2 configuration or file-format error; 3 eigensolver
non-convergence; 4 a scientific verdict failed to reproduce; 5 density not
representable. Every output file is written atomically, so error paths
leave no partial files.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .counterexample import (
    CounterexampleReport,
    build_family,
    default_eps_values,
    epsilon_sweep,
    make_j_eps,
)
from .densities import DensityPair, density_pair_from_state, paramagnetic_current
from .eigensolve import lowest_eigenpairs
from .exceptions import (
    CdftLabError,
    ConfigError,
    ConvergenceError,
    FieldFormatError,
    RepresentationError,
)
from .fieldio import read_field, write_scalar_field, write_text_atomic, write_vector_field
from .functionals import e_full
from .grid import Grid2D, ScalarField, VectorField, make_grid, MIN_NODES
from .inversion import fock_darwin_family, membership_check
from .operators import hamiltonian

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERDICT = 4
EXIT_REPRESENTATION = 5


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    n: int = 257
    L: float | str = "auto"            # "auto" resolves to 8 / sqrt(alpha)
    alpha: float = 1.0
    B: float = -1.0
    Btilde: float | None = -0.5
    eps_list: list[float] | None = None
    eps_count: int = 5
    tol: float = 1e-8
    max_iter: int = 300
    seed: int = 1234
    output_dir: str = "out"

    def resolved_L(self) -> float:
        if self.L == "auto":
            return 8.0 / float(np.sqrt(self.alpha))
        return float(self.L)

    def make_grid(self) -> Grid2D:
        return make_grid(self.resolved_L(), self.n)


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration.

    All module preconditions that can be checked statically are checked
    here, before any computation starts.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err
    _expect(isinstance(raw, dict), f"{path}: top level must be an object")

    cfg = RunConfig()
    grid_sec = raw.get("grid", {})
    _expect(isinstance(grid_sec, dict), "field 'grid' must be an object")
    cfg.n = grid_sec.get("n", cfg.n)
    cfg.L = grid_sec.get("L", cfg.L)
    _expect(isinstance(cfg.n, int) and cfg.n >= MIN_NODES,
            f"field 'grid.n' must be an integer >= {MIN_NODES}, got {cfg.n!r}")
    if cfg.L != "auto":
        _expect(isinstance(cfg.L, (int, float)) and float(cfg.L) > 0,
                f"field 'grid.L' must be positive or \"auto\", got {cfg.L!r}")

    fam = raw.get("family", {})
    _expect(isinstance(fam, dict), "field 'family' must be an object")
    cfg.alpha = fam.get("alpha", cfg.alpha)
    cfg.B = fam.get("B", cfg.B)
    cfg.Btilde = fam.get("Btilde", cfg.Btilde)
    _expect(isinstance(cfg.alpha, (int, float)) and cfg.alpha > 0,
            f"field 'family.alpha' must be positive, got {cfg.alpha!r}")
    _expect(isinstance(cfg.B, (int, float)), "field 'family.B' must be a number")
    _expect(abs(cfg.B) < 2 * cfg.alpha,
            f"family requires |B| < 2*alpha, got B={cfg.B}, alpha={cfg.alpha}")
    if cfg.Btilde is not None:
        _expect(isinstance(cfg.Btilde, (int, float)),
                "field 'family.Btilde' must be a number")

    sweep = raw.get("sweep", {})
    _expect(isinstance(sweep, dict), "field 'sweep' must be an object")
    if "eps_list" in sweep:
        lst = sweep["eps_list"]
        _expect(isinstance(lst, list) and lst and
                all(isinstance(x, (int, float)) for x in lst),
                "field 'sweep.eps_list' must be a non-empty list of numbers")
        cfg.eps_list = [float(x) for x in lst]
    cfg.eps_count = sweep.get("eps_count", cfg.eps_count)
    _expect(isinstance(cfg.eps_count, int) and cfg.eps_count >= 1,
            f"field 'sweep.eps_count' must be a positive integer, got {cfg.eps_count!r}")

    sol = raw.get("solver", {})
    _expect(isinstance(sol, dict), "field 'solver' must be an object")
    cfg.tol = sol.get("tol", cfg.tol)
    cfg.max_iter = sol.get("max_iter", cfg.max_iter)
    cfg.seed = sol.get("seed", cfg.seed)
    _expect(isinstance(cfg.tol, (int, float)) and 0 < cfg.tol < 1,
            f"field 'solver.tol' must be in (0, 1), got {cfg.tol!r}")
    _expect(isinstance(cfg.max_iter, int) and cfg.max_iter >= 1,
            f"field 'solver.max_iter' must be a positive integer, got {cfg.max_iter!r}")
    _expect(isinstance(cfg.seed, int) and cfg.seed >= 0,
            f"field 'solver.seed' must be a non-negative integer, got {cfg.seed!r}")

    cfg.output_dir = raw.get("output_dir", cfg.output_dir)
    _expect(isinstance(cfg.output_dir, str) and cfg.output_dir,
            "field 'output_dir' must be a non-empty string")
    return cfg


def _metadata(cfg: RunConfig, seed: int) -> dict:
    return {
        "timestamp": datetime.datetime.now(datetime.timezone.utc)
                     .replace(microsecond=0).isoformat(),
        "version": __version__,
        "grid": {"n": cfg.n, "L": cfg.resolved_L()},
        "solver": {"tol": cfg.tol, "max_iter": cfg.max_iter, "seed": seed},
        "family": {"alpha": cfg.alpha, "B": cfg.B, "Btilde": cfg.Btilde},
    }


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig, out_dir: Path, seed: int) -> int:
    grid = cfg.make_grid()
    fam = fock_darwin_family(grid, cfg.alpha, cfg.B)
    eig = lowest_eigenpairs(hamiltonian(fam.pair), k=2, tol=cfg.tol,
                            max_iter=cfg.max_iter, seed=seed,
                            initial=[fam.psi0])
    psi0 = eig.eigenvectors[0]
    dp = density_pair_from_state(psi0, fam.pair.A,
                                 provenance=f"solve alpha={cfg.alpha:g} B={cfg.B:g}")
    payload = {
        "eigenvalues": eig.eigenvalues,
        "residuals": eig.residuals,
        "gap": eig.gap,
        "iterations": eig.iterations,
        "metadata": _metadata(cfg, seed),
    }
    write_text_atomic(out_dir / "eigenvalues.json", _dump_json(payload))
    write_scalar_field(out_dir / "rho.csv", dp.rho)
    write_vector_field(out_dir / "jp.csv", paramagnetic_current(psi0))
    write_vector_field(out_dir / "j.csv", dp.j)
    print(f"ground energy {eig.eigenvalues[0]:.6f}, gap {eig.gap:.6f}, "
          f"residuals {eig.residuals}")
    print(f"wrote eigenvalues.json, rho.csv, jp.csv, j.csv to {out_dir}")
    return EXIT_OK


def _print_verdict_table(report: CounterexampleReport) -> None:
    print(f"family: alpha={report.alpha:g}, B={report.B:g}, "
          f"Btilde={report.Btilde:g}, eps_max={report.eps_max:g}")
    print(f"certified e0 = {report.e0:.6f}, gap = {report.gap:.4f}, "
          f"moment <r^2> = {report.moment:.6f}")
    print(f"{'eps':>6} {'f_hk':>12} {'e_tilde':>12} {'e_full':>12} "
          f"{'correction':>12} {'in_A1':>6} {'discrepancy':>12}")
    for r in report.rows:
        print(f"{r.eps:6.3f} {r.f_hk:12.6f} {r.e_tilde:12.6f} {r.e_full:12.6f} "
              f"{r.correction:12.6f} {str(r.in_A1):>6} {r.discrepancy:12.3e}")
    print("verdicts:")
    for name, ok in report.verdicts.items():
        print(f"  {name:32s} {'PASS' if ok else 'FAIL'}")
    print(f"  {'all_rows_certified_in_A1':32s} "
          f"{'PASS' if report.conforming else 'FAIL'}")


def _run_sweep(cfg: RunConfig, n: int, seed: int) -> CounterexampleReport:
    grid = make_grid(cfg.resolved_L(), n)
    family = build_family(grid, cfg.alpha, cfg.B, cfg.Btilde,
                          tol=cfg.tol, seed=seed, max_iter=cfg.max_iter)
    eps_values = cfg.eps_list or default_eps_values(family.eps_max, cfg.eps_count)
    meta = _metadata(cfg, seed)
    meta["grid"]["n"] = n
    return epsilon_sweep(family, eps_values, tol=cfg.tol, seed=seed,
                         max_iter=cfg.max_iter, metadata=meta)


def cmd_counterexample(cfg: RunConfig, out_dir: Path, seed: int,
                       refine: bool) -> int:
    _expect(cfg.Btilde is not None, "counterexample requires 'family.Btilde'")
    _expect(cfg.B < 0, f"family requires B < 0, got B={cfg.B}")
    _expect(0 < abs(cfg.Btilde) < abs(cfg.B),
            f"family requires 0 < |Btilde| < |B|, got Btilde={cfg.Btilde}, B={cfg.B}")
    report = _run_sweep(cfg, cfg.n, seed)
    payload = report.to_dict()
    if refine:
        n_fine = 2 * cfg.n - 1
        fine = _run_sweep(cfg, n_fine, seed)
        worst = max(r.discrepancy for r in report.rows)
        worst_fine = max(r.discrepancy for r in fine.rows)
        factor = worst / worst_fine if worst_fine > 0 else float("inf")
        payload["refinement"] = {
            "n_coarse": cfg.n,
            "n_fine": n_fine,
            "worst_discrepancy_coarse": worst,
            "worst_discrepancy_fine": worst_fine,
            "improvement_factor": factor,
            "estimated_order": float(np.log2(factor)) if np.isfinite(factor) else None,
        }
        print(f"refinement {cfg.n} -> {n_fine}: worst discrepancy "
              f"{worst:.3e} -> {worst_fine:.3e} "
              f"(factor {factor:.2f}, order ~{np.log2(factor):.2f})")
    write_text_atomic(out_dir / "report.json", _dump_json(payload))
    write_text_atomic(out_dir / "sweep.csv", report.sweep_csv())
    _print_verdict_table(report)
    print(f"wrote report.json and sweep.csv to {out_dir}")
    ok = report.all_verdicts_hold and report.conforming
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_functional(cfg: RunConfig, out_dir: Path, seed: int,
                   rho_path: str, j_path: str) -> int:
    rho_f = read_field(rho_path)
    if not isinstance(rho_f, ScalarField):
        raise FieldFormatError(f"{rho_path} must hold a scalar field")
    j_f = read_field(j_path, grid=rho_f.grid)
    if not isinstance(j_f, VectorField):
        raise FieldFormatError(f"{j_path} must hold a vector field")
    grid = rho_f.grid
    try:
        d = DensityPair(rho_f, j_f, provenance=f"files {rho_path}, {j_path}")
    except RepresentationError:
        raise
    except ValueError as err:
        raise FieldFormatError(f"invalid density pair: {err}") from err
    fam = fock_darwin_family(grid, cfg.alpha, cfg.B)
    mem = membership_check(d, tol=cfg.tol, seed=seed, max_iter=cfg.max_iter)
    report = e_full(d, fam.pair)
    payload = report.to_dict()
    payload["in_A1"] = mem.in_A1
    payload["membership_reason"] = mem.reason
    payload["inversion_imag_residual"] = mem.imag_residual
    payload["certified_e0"] = mem.e0
    payload["metadata"] = _metadata(cfg, seed)
    write_text_atomic(out_dir / "functional_report.json", _dump_json(payload))
    print(f"f_hk        = {report.f_hk:.6f}")
    print(f"e_tilde     = {report.e_tilde:.6f}")
    print(f"correction  = {report.correction:.6f}")
    print(f"e_full      = {report.e_full:.6f}")
    print(f"cross check = {report.cross_check:.6f} "
          f"(discrepancy {report.discrepancy:.3e})")
    print(f"bracket zero: {report.bracket_zero}, in_A1: {mem.in_A1}")
    print(f"wrote functional_report.json to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdftlab",
        description="Ground states, density-pair functionals and the "
                    "current-family energy sweep on a 2D grid.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="solver seed (overrides config)")

    p_solve = sub.add_parser("solve", help="eigenpairs and density fields")
    common(p_solve)
    p_cx = sub.add_parser("counterexample", help="family sweep and verdicts")
    common(p_cx)
    p_cx.add_argument("--refine", action="store_true",
                      help="repeat at doubled resolution and report the "
                           "empirical convergence order")
    p_fn = sub.add_parser("functional", help="evaluate functionals on files")
    common(p_fn)
    p_fn.add_argument("--rho", required=True, help="density CSV (scalar field)")
    p_fn.add_argument("--j", required=True, help="current CSV (vector field)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.seed
        out_dir = Path(args.out) if args.out else Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            return cmd_solve(cfg, out_dir, seed)
        if args.command == "counterexample":
            return cmd_counterexample(cfg, out_dir, seed, args.refine)
        return cmd_functional(cfg, out_dir, seed, args.rho, args.j)
    except (ConfigError, FieldFormatError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except RepresentationError as err:
        print(f"representation error: {err}", file=sys.stderr)
        return EXIT_REPRESENTATION
    except CdftLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
