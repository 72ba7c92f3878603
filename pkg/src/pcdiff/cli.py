"""Batch experiment runner.

    pcdiff run <config.json> [--out DIR] [--seed S] [--quiet]
    pcdiff sweep <config.json> --param NAME --values v1,v2,... [--workers W]

A config is a JSON object with ``mode`` (solve, verify_suite, convergence,
contraction_pair, kernel_lab), ``seed``, and ``problem`` / ``solver`` /
``output`` blocks; see ``configs/`` for complete examples.  The output
directory is ``--out``, else ``output.directory``, else ``$PCDIFF_OUT``, else
``./out``.

Exit codes: number of failed checks for the checking modes (0 for ``solve``),
2 for configuration errors, 3 for solver failures.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import kernels as kn
from . import verify as vf
from .kernels import KernelPair, TimeGrid, sample_cell_averages
from .report import Report
from .solver import (
    AdaptiveBound,
    FixedBound,
    Nonlinearity,
    PicardConvergenceError,
    ProblemSpec,
    SolverConfig,
    TruncationBudgetError,
    default_eps_schedule,
    solution_rows,
    solve,
)
from .spatial import CoefficientBoundError, CoefficientField, Mesh1D

ENV_OUT = "PCDIFF_OUT"
MODES = ("solve", "verify_suite", "convergence", "contraction_pair", "kernel_lab")
PRESETS = ("sine", "bump", "constant", "piecewise")
EXIT_CONFIG = 2
EXIT_SOLVER = 3

# short sweep names for common parameters
ALIASES = {
    "alpha": "problem.kernel.alpha",
    "rate": "problem.kernel.rate",
    "m": "problem.phi.m",
    "N": "problem.N",
    "Nx": "problem.Nx",
    "T": "problem.T",
    "L": "problem.L",
    "seed": "seed",
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_MISSING = object()


class _Block:
    """A config sub-object that remembers its dotted path and which keys were read."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigError(path, f"expected an object, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key: str, kind: type | tuple = float, default: Any = _MISSING) -> Any:
        self.used.add(key)
        if key not in self.data or self.data[key] is None:
            if default is _MISSING:
                raise ConfigError(self._key(key), "missing required field")
            return default
        val = self.data[key]
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(self._key(key), f"expected a number, got {val!r}")
            if not math.isfinite(val):
                raise ConfigError(self._key(key), "must be finite")
            return float(val)
        if kind is int:
            if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
                raise ConfigError(self._key(key), f"expected an integer, got {val!r}")
            return int(val)
        if not isinstance(val, kind):
            raise ConfigError(self._key(key), f"expected {getattr(kind, '__name__', kind)}, got {val!r}")
        return val

    def block(self, key: str, default: Any = _MISSING) -> "_Block | None":
        raw = self.get(key, dict, default)
        return None if raw is None else _Block(raw, self._key(key))

    def done(self) -> None:
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ConfigError(self._key(extra[0]), "unknown field")


# ---------------------------------------------------------------------------
# presets


def _profile(b: _Block, L: float) -> tuple[Callable[[np.ndarray], np.ndarray], float, float]:
    """Spatial profile for a preset plus its (min, max) over the domain."""
    preset = b.get("preset", str)
    if preset not in PRESETS:
        raise ConfigError(b._key("preset"), f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    if preset == "sine":
        amp = b.get("amplitude", float, 1.0)
        mode = b.get("mode", int, 1)
        offset = b.get("offset", float, 0.0)
        if mode < 1:
            raise ConfigError(b._key("mode"), "must be >= 1")
        fn = lambda x: offset + amp * np.sin(mode * np.pi * x / L)  # noqa: E731
        return fn, offset - abs(amp), offset + abs(amp)
    if preset == "bump":
        amp = b.get("amplitude", float, 1.0)
        c = b.get("center", float, 0.5 * L)
        w = b.get("width", float, 0.25 * L)
        if w <= 0:
            raise ConfigError(b._key("width"), "must be positive")
        fn = lambda x: amp * np.maximum(0.0, 1.0 - ((x - c) / w) ** 2) ** 2  # noqa: E731
        return fn, min(0.0, amp), max(0.0, amp)
    if preset == "constant":
        val = b.get("value", float)
        return (lambda x: np.full_like(x, val)), val, val
    left = b.get("left", float)
    right = b.get("right", float)
    split = b.get("split", float, 0.5 * L)
    return (lambda x: np.where(x < split, left, right)), min(left, right), max(left, right)


def _initial(b: _Block, mesh: Mesh1D) -> np.ndarray:
    fn, _, _ = _profile(b, mesh.L)
    b.done()
    return np.asarray(fn(mesh.interior), dtype=float)


def _forcing(b: _Block | None, mesh: Mesh1D):
    if b is None:
        return None
    growth = b.get("growth", float, 0.0)
    fn, _, _ = _profile(b, mesh.L)
    b.done()
    return lambda t, x: (1.0 + growth * t) * fn(x)


def _coefficient(b: _Block | None, mesh: Mesh1D) -> CoefficientField:
    if b is None:
        return CoefficientField.constant(1.0)
    fn, lo, hi = _profile(b, mesh.L)
    b.done()
    if not lo > 0:
        raise ConfigError(b.path, f"coefficient must be positive, its minimum is {lo:g}")
    return CoefficientField(lambda t, x: fn(x), lo, hi)


def _kernel(b: _Block) -> KernelPair:
    family = b.get("family", str)
    try:
        if family == kn.FRACTIONAL:
            pair = KernelPair.fractional(b.get("alpha", float))
        elif family == kn.TEMPERED:
            pair = KernelPair.tempered(b.get("alpha", float), b.get("rate", float))
        elif family == kn.DISTRIBUTED:
            pair = KernelPair.distributed_order()
        elif family == kn.CLASSICAL:
            pair = KernelPair.classical()
        elif family == kn.INTEGRAL:
            pair = KernelPair.integral()
        else:
            raise ConfigError(b._key("family"), f"unknown family {family!r}; choose from {', '.join(kn.FAMILIES)}")
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(b.path, str(err)) from err
    b.done()
    return pair


def _phi(b: _Block | None) -> Nonlinearity:
    if b is None:
        return Nonlinearity.identity()
    kind = b.get("kind", str)
    if kind == "identity":
        phi = Nonlinearity.identity()
    elif kind == "linear":
        phi = Nonlinearity.linear_map(b.get("slope", float))
    elif kind == "porous_medium":
        m = b.get("m", float)
        if not m > 1:
            raise ConfigError(b._key("m"), f"porous medium exponent must exceed 1, got {m:g}")
        phi = Nonlinearity.porous_medium(m, b.get("R", float, 1.0))
    else:
        raise ConfigError(b._key("kind"), f"unknown nonlinearity {kind!r}")
    b.done()
    return phi


def build_problem(raw: dict, path: str = "problem") -> ProblemSpec:
    b = _Block(raw, path)
    try:
        mesh = Mesh1D(b.get("L", float, 1.0), b.get("Nx", int))
        grid = TimeGrid(b.get("T", float, 1.0), b.get("N", int))
    except ValueError as err:
        raise ConfigError(path, str(err)) from err
    pair = _kernel(b.block("kernel"))
    phi = _phi(b.block("phi", None))
    u0 = _initial(b.block("u0"), mesh)
    f = _forcing(b.block("f", None), mesh)
    coeff = _coefficient(b.block("a", None), mesh)
    b.done()
    try:
        return ProblemSpec(mesh, grid, pair, coeff, phi, u0, f)
    except ValueError as err:
        raise ConfigError(path, str(err)) from err


def build_solver(raw: dict | None) -> SolverConfig:
    if raw is None:
        return SolverConfig()
    b = _Block(raw, "solver")
    kw: dict[str, Any] = {}
    for key, kind in (("picard_tol", float), ("picard_maxit", int), ("damping", float)):
        if key in raw:
            kw[key] = b.get(key, kind)
    if "eps_schedule" in raw:
        sched = b.get("eps_schedule", list)
        kw["eps_schedule"] = tuple(sched) if sched else default_eps_schedule()
    if "linearization" in raw:
        kw["linearization"] = b.get("linearization", str)
    tb = b.block("truncation", None)
    if tb is not None:
        kind = tb.get("kind", str)
        if kind == "fixed":
            kw["truncation"] = FixedBound(tb.get("value", float))
        elif kind == "adaptive":
            kw["truncation"] = AdaptiveBound(tb.get("safety", float, 1.5), tb.get("max_escalations", int, 5))
        else:
            raise ConfigError(tb._key("kind"), f"unknown truncation {kind!r}")
        tb.done()
    b.done()
    try:
        return SolverConfig(**kw)
    except (TypeError, ValueError) as err:
        raise ConfigError("solver", str(err)) from err


# ---------------------------------------------------------------------------
# experiment config


@dataclass
class ExperimentConfig:
    mode: str
    seed: int
    problem: dict
    solver: dict | None
    directory: str | None
    formats: tuple[str, ...]
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: Any) -> "ExperimentConfig":
        b = _Block(raw, "")
        mode = b.get("mode", str)
        if mode not in MODES:
            raise ConfigError("mode", f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
        seed = b.get("seed", int, 0)
        problem = b.get("problem", dict)
        solver = b.get("solver", dict, None)
        out = b.block("output", None)
        directory, formats = None, ("csv", "json")
        if out is not None:
            directory = out.get("directory", str, None)
            formats = tuple(out.get("formats", list, list(formats)))
            bad = [f for f in formats if f not in ("csv", "json")]
            if bad:
                raise ConfigError("output.formats", f"unsupported format {bad[0]!r}")
            out.done()
        extra = {}
        for key in ("suite", "convergence", "pair", "kernel_lab"):
            if key in raw:
                extra[key] = b.get(key, dict)
        b.done()
        cfg = cls(mode, seed, problem, solver, directory, formats, extra)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """Build every object once so bad fields fail before any work starts."""
        spec = build_problem(self.problem)
        build_solver(self.solver)
        if self.mode == "convergence":
            _convergence_options(self, spec)
        self.suite_options()
        if "pair" in self.extra:
            build_problem(_merge(self.problem, self.extra["pair"]), "pair")

    def suite_options(self) -> vf.SuiteOptions:
        raw = self.extra.get("suite")
        opts = vf.SuiteOptions()
        if raw is None:
            return opts
        b = _Block(raw, "suite")
        for key in ("gammas", "yosida_gammas", "lags", "exponents"):
            if key in raw:
                setattr(opts, key, tuple(b.get(key, list)))
        for key in ("convexity_trials", "contraction_pairs"):
            if key in raw:
                setattr(opts, key, b.get(key, int))
        b.done()
        return opts


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and "preset" not in v and "family" not in v:
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError("", f"cannot read {path}: {err.strerror}") from err
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError("", f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err


def set_path(raw: dict, dotted: str, value: Any) -> dict:
    """Copy of ``raw`` with the field at ``dotted`` replaced."""
    dotted = ALIASES.get(dotted, dotted)
    out = copy.deepcopy(raw)
    node = out
    *head, last = dotted.split(".")
    for key in head:
        if not isinstance(node.get(key), dict):
            raise ConfigError(dotted, f"no object at {key!r}")
        node = node[key]
    node[last] = value
    return out


# ---------------------------------------------------------------------------
# outputs


def _fmt(x: float) -> str:
    return repr(float(x))


def write_solution_csv(path: Path, spec: ProblemSpec, sol) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "t", "i", "x", "u", "v"])
        for n, t, i, x, u, v in solution_rows(spec, sol):
            w.writerow([n, _fmt(t), i, _fmt(x), _fmt(u), _fmt(v)])


def write_table(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) if isinstance(c, float) else c for c in row])


@dataclass
class Outcome:
    exit_code: int
    metrics: dict[str, float]
    summary: str


# ---------------------------------------------------------------------------
# modes


def _mode_solve(cfg: ExperimentConfig, out: Path) -> Outcome:
    spec = build_problem(cfg.problem)
    sol = solve(spec, build_solver(cfg.solver))
    if "csv" in cfg.formats:
        write_solution_csv(out / "solution.csv", spec, sol)
    report = Report()
    report.add(vf.linfty_check(sol, spec.phi.R, spec.u0))
    report.add(vf.energy_check(sol, spec))
    metrics = {
        "max_abs_u": float(np.abs(sol.u).max()),
        "total_iterations": float(sol.total_iterations),
        "escalations": float(sol.escalations),
        "final_l2": math.sqrt(spec.mesh.h * float((sol.interior[-1] ** 2).sum())),
    }
    if "json" in cfg.formats:
        (out / "report.json").write_text(report.to_json())
    lines = [f"{k} = {v:.6e}" for k, v in metrics.items()]
    lines.append(f"M = {sol.M}, truncation_active = {sol.truncation_active}, eps = {sol.eps:g}")
    return Outcome(0, metrics, "\n".join(lines) + "\n\n" + report.to_text())


def _mode_verify(cfg: ExperimentConfig, out: Path) -> Outcome:
    spec = build_problem(cfg.problem)
    report = vf.run_suite(spec, build_solver(cfg.solver), cfg.seed, cfg.suite_options())
    if "json" in cfg.formats:
        (out / "report.json").write_text(report.to_json())
    metrics = {"n_checks": float(len(report)), "n_failed": float(report.n_failed)}
    return Outcome(report.n_failed, metrics, report.to_text())


def _convergence_options(cfg: ExperimentConfig, spec: ProblemSpec) -> tuple[int, bool]:
    if spec.pair.family != kn.FRACTIONAL:
        raise ConfigError("problem.kernel.family", "convergence mode needs the fractional family")
    b = _Block(cfg.extra.get("convergence", {}), "convergence")
    levels = b.get("levels", int, 1)
    refine_space = b.get("refine_space", bool, False)
    b.done()
    if levels < 1 or spec.grid.N % 2 ** (levels - 1):
        raise ConfigError("convergence.levels", f"N = {spec.grid.N} cannot be halved {levels - 1} times")
    return levels, refine_space


def _mode_convergence(cfg: ExperimentConfig, out: Path) -> Outcome:
    spec = build_problem(cfg.problem)
    levels, refine_space = _convergence_options(cfg, spec)
    table = vf.exact_linear_benchmark(spec.pair.alpha, spec.mesh, spec.grid, levels, refine_space)
    ratios = [math.nan] + table.ratios()
    rows = [[r.N, r.Nx, r.linf_error, r.final_l2_error, q] for r, q in zip(table.rows, ratios)]
    if "csv" in cfg.formats:
        write_table(out / "convergence.csv", ["N", "Nx", "linf_error", "final_l2_error", "linf_ratio"], rows)
    finest = table.rows[-1]
    metrics = {"linf_error": finest.linf_error, "final_l2_error": finest.final_l2_error}
    text = "\n".join(
        f"N={r[0]:6d} Nx={r[1]:5d} linf={r[2]:.6e} l2(T)={r[3]:.6e} ratio={r[4]:.4f}" for r in rows
    )
    if "json" in cfg.formats:
        data = {"alpha": table.alpha, "rows": [dict(zip(["N", "Nx", "linf_error", "final_l2_error"], r[:4])) for r in rows]}
        (out / "report.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return Outcome(0, metrics, text + "\n")


def _mode_contraction(cfg: ExperimentConfig, out: Path) -> Outcome:
    spec1 = build_problem(cfg.problem)
    solver = build_solver(cfg.solver)
    if "pair" in cfg.extra:
        spec2 = build_problem(_merge(cfg.problem, cfg.extra["pair"]), "pair")
    else:
        u0, f = vf.random_data(np.random.default_rng(cfg.seed), spec1.mesh)
        spec2 = ProblemSpec(spec1.mesh, spec1.grid, spec1.pair, spec1.coeff, spec1.phi, u0, f)
    sol1, sol2 = solve(spec1, solver), solve(spec2, solver)
    chk = vf.l1_contraction_check(sol1, spec1, sol2, spec2)
    report = Report([chk])
    if "csv" in cfg.formats:
        write_solution_csv(out / "solution.csv", spec1, sol1)
        write_solution_csv(out / "solution_pair.csv", spec2, sol2)
    if "json" in cfg.formats:
        (out / "report.json").write_text(report.to_json())
    metrics = {"lhs": chk.lhs, "rhs": chk.rhs, "margin": chk.margin}
    return Outcome(report.n_failed, metrics, report.to_text())


def _mode_kernel_lab(cfg: ExperimentConfig, out: Path) -> Outcome:
    spec = build_problem(cfg.problem)
    b = _Block(cfg.extra.get("kernel_lab", {}), "kernel_lab")
    grids = [int(n) for n in b.get("grids", list, [spec.grid.N])]
    b.done()
    if not grids or min(grids) < 1:
        raise ConfigError("kernel_lab.grids", "need a nonempty list of positive step counts")
    T = spec.grid.T
    rows = []
    for N in grids:
        grid = TimeGrid(T, N)
        d = kn.verify_pc_pair(spec.pair, grid, 1.0)["pc_identity_l1"].details
        rows.append([N, d["max_defect"], d["l1_defect"]])
    grid = spec.grid
    k = sample_cell_averages(spec.pair, "K", grid)
    l = sample_cell_averages(spec.pair, "L", grid)
    report = kn.verify_pc_pair(spec.pair, grid, 1e-2)
    for gam in vf.SuiteOptions().gammas:
        report.add(vf.resolvent_check(l, k, gam))
    report.add(vf.yosida_check(l))
    if "csv" in cfg.formats:
        write_table(out / "kernel_lab.csv", ["N", "max_defect", "l1_defect"], rows)
        k.to_csv(out / "k.csv")
        l.to_csv(out / "l.csv")
    if "json" in cfg.formats:
        (out / "report.json").write_text(report.to_json())
    metrics = {"max_defect": rows[-1][1], "l1_defect": rows[-1][2], "n_failed": float(report.n_failed)}
    text = "\n".join(f"N={r[0]:6d} max_defect={r[1]:.6e} l1_defect={r[2]:.6e}" for r in rows)
    return Outcome(report.n_failed, metrics, text + "\n\n" + report.to_text())


_MODES = {
    "solve": _mode_solve,
    "verify_suite": _mode_verify,
    "convergence": _mode_convergence,
    "contraction_pair": _mode_contraction,
    "kernel_lab": _mode_kernel_lab,
}


def resolve_out(cli_out: str | None, cfg: ExperimentConfig) -> Path:
    return Path(cli_out or cfg.directory or os.environ.get(ENV_OUT) or "out")


def run_experiment(raw: dict, out: Path, quiet: bool = True) -> Outcome:
    """Validate, execute and write one experiment; raises on config or solver errors."""
    cfg = ExperimentConfig.from_dict(raw)
    out.mkdir(parents=True, exist_ok=True)
    outcome = _MODES[cfg.mode](cfg, out)
    (out / "summary.txt").write_text(f"mode = {cfg.mode}\nseed = {cfg.seed}\n\n{outcome.summary}")
    if not quiet:
        print(outcome.summary, end="")
    return outcome


SOLVER_ERRORS = (PicardConvergenceError, TruncationBudgetError, CoefficientBoundError, np.linalg.LinAlgError)


def _guarded(fn, *args) -> tuple[int, Outcome | None, str]:
    try:
        outcome = fn(*args)
    except ConfigError as err:
        return EXIT_CONFIG, None, f"config error: {err}"
    except SOLVER_ERRORS as err:
        return EXIT_SOLVER, None, f"solver error: {type(err).__name__}: {err}"
    return outcome.exit_code, outcome, ""


def cmd_run(args) -> int:
    try:
        raw = load_config(args.config)
        if args.seed is not None:
            raw = set_path(raw, "seed", args.seed)
        cfg = ExperimentConfig.from_dict(raw)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = resolve_out(args.out, cfg)
    code, _, msg = _guarded(run_experiment, raw, out, args.quiet)
    if msg:
        print(msg, file=sys.stderr)
    elif not args.quiet:
        print(f"wrote {out}")
    return code


def parse_values(text: str) -> list[Any]:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            vals.append(json.loads(tok))
        except json.JSONDecodeError:
            vals.append(tok)
    if not vals:
        raise ConfigError("--values", "empty values list")
    return vals


def _child(raw: dict, out: str) -> tuple[int, dict[str, float], str]:
    code, outcome, msg = _guarded(run_experiment, raw, Path(out), True)
    return code, (outcome.metrics if outcome else {}), msg


def _label(value: Any) -> str:
    return str(value).replace("/", "_").replace(" ", "")


def cmd_sweep(args) -> int:
    try:
        raw = load_config(args.config)
        if args.seed is not None:
            raw = set_path(raw, "seed", args.seed)
        values = parse_values(args.values)
        configs = [set_path(raw, args.param, v) for v in values]
        for c in configs:
            ExperimentConfig.from_dict(c)
        base = ExperimentConfig.from_dict(raw)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    root = resolve_out(args.out, base)
    root.mkdir(parents=True, exist_ok=True)
    dirs = [str(root / f"{args.param}={_label(v)}") for v in values]
    workers = args.workers or min(len(values), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_child, configs, dirs))
    else:
        results = [_child(c, d) for c, d in zip(configs, dirs)]

    rows = []
    status = 0
    for v, (code, metrics, msg) in zip(values, results):
        if msg:
            print(f"{args.param}={v}: {msg}", file=sys.stderr)
        if code:
            status = status or code
        for name in sorted(metrics):
            rows.append([args.param, v, name, float(metrics[name])])
        rows.append([args.param, v, "exit_code", code])
    if base.mode == "convergence":
        errs = [(v, m.get("linf_error")) for v, (_, m, _) in zip(values, results)]
        for (_, a), (v, b) in zip(errs, errs[1:]):
            if a is not None and b is not None:
                rows.append([args.param, v, "linf_ratio", a / b if b > 0 else math.inf])
    write_table(root / "aggregate.csv", ["param", "value", "metric", "result"], rows)
    if not args.quiet:
        for r in rows:
            print(f"{r[0]}={r[1]}  {r[2]:>18s}  {r[3]}")
        print(f"wrote {root}")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcdiff", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON experiment config")
    common.add_argument("--out", help=f"output directory (default: config, ${ENV_OUT}, ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--quiet", action="store_true", help="no console summary")
    common.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    r = sub.add_parser("run", parents=[common], help="run one experiment")
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("sweep", parents=[common], help="run one experiment per parameter value")
    s.add_argument("--param", required=True, help="dotted config path or alias (" + ", ".join(ALIASES) + ")")
    s.add_argument("--values", required=True, help="comma-separated values, parsed as JSON scalars")
    s.add_argument("--workers", type=int, default=0, help="process count (default: one per value)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
