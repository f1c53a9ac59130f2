"""Batch experiment runner: convergence tables, spot prices and stability spectra.

Configuration is a plain ``key = value`` file, one key per line, ``#`` starts
a comment. Recognised keys and defaults:

    test_case        table1 | table4 | custom          (table1)
    scheme           LBIE | LRPI | both                (both)
    grid_sizes       comma list of N, ascending        (16,32,64,128)
    time_steps       comma list of M, same length      (M = N)
    theta            time weight                       (0.5)
    xi               stretching intensity              (case default)
    s_max_multiple   S_max / E                         (5)
    sigma, r, strike, maturity                         (case default; required for custom)
    american         true | false                      (false)
    richardson       true | false                      (false)
    reference        analytic | fine-grid              (analytic, or fine-grid when american)
    reference_n      N of the fine-grid reference      (1024)
    reference_m      M of the fine-grid reference      (1024)
    rq_factor        sub-domain half-width / h         (0.5)
    rw_over_rq       support radius / r_Q              (4)
    quad_panels      Simpson panels per half domain    (32)
    constraint_space physical | fictitious             (physical)
    tolerance        BiCGSTAB relative tolerance       (1e-10)
    max_iterations   BiCGSTAB iteration cap            (200)
    workers          parallel rows in converge         (1)
    cache_dir        fine-grid reference cache         (<out>/cache)
    output_path      output directory                  (results)
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import platform
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .analysis import convergence_ratio, error_metrics, stability_diagnostic
from .grid import Grid
from .linalg import SolverConfig
from .model import ModelParams, bs_put_exact
from .stepper import evaluate_at, march, price_american_richardson

CSV_COLUMNS = ("N", "M", "RMSError", "MaxError", "Ratio", "CPUTime")
STABLE_THETAS = (0.0, 0.5)


class ConfigError(ValueError):
    """Invalid configuration file or field."""


@dataclass
class ExperimentConfig:
    test_case: str = "table1"
    scheme: str = "both"
    grid_sizes: list[int] = field(default_factory=lambda: [16, 32, 64, 128])
    time_steps: list[int] | None = None
    theta: float = 0.5
    xi: float | None = None
    s_max_multiple: float = 5.0
    sigma: float | None = None
    r: float | None = None
    strike: float | None = None
    maturity: float | None = None
    american: bool = False
    richardson: bool = False
    reference: str | None = None
    reference_n: int = 1024
    reference_m: int = 1024
    rq_factor: float = 0.5
    rw_over_rq: float = 4.0
    quad_panels: int = 32
    constraint_space: str = "physical"
    tolerance: float = 1e-10
    max_iterations: int = 200
    workers: int = 1
    cache_dir: str | None = None
    output_path: str = "results"
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        def fail(name, why):
            raise ConfigError(f"{name}: {why}")

        if self.test_case not in ("table1", "table4", "custom"):
            fail("test_case", "must be table1, table4 or custom")
        if self.scheme not in ("LBIE", "LRPI", "both"):
            fail("scheme", "must be LBIE, LRPI or both")
        if not self.grid_sizes:
            fail("grid_sizes", "must not be empty")
        if any(n < 8 for n in self.grid_sizes):
            fail("grid_sizes", "every N must be at least 8")
        if any(b <= a for a, b in zip(self.grid_sizes, self.grid_sizes[1:])):
            fail("grid_sizes", "must be strictly ascending")
        if self.time_steps is not None:
            if len(self.time_steps) != len(self.grid_sizes):
                fail("time_steps", "must have one entry per grid size")
            if any(m < 1 for m in self.time_steps):
                fail("time_steps", "every M must be positive")
        if not 0.0 <= self.theta <= 1.0:
            fail("theta", "must lie in [0, 1]")
        if self.test_case == "custom":
            for name in ("sigma", "r", "strike", "maturity"):
                if getattr(self, name) is None:
                    fail(name, "required for test_case=custom")
        if self.reference is None:
            self.reference = "fine-grid" if self.american else "analytic"
        if self.reference not in ("analytic", "fine-grid"):
            fail("reference", "must be analytic or fine-grid")
        if self.reference == "analytic" and self.american:
            fail("reference", "analytic reference is only valid for European runs")
        if self.richardson and not self.american:
            fail("richardson", "requires american = true")
        if self.constraint_space not in ("physical", "fictitious"):
            fail("constraint_space", "must be physical or fictitious")
        if self.workers < 1:
            fail("workers", "must be at least 1")
        if self.quad_panels < 1:
            fail("quad_panels", "must be at least 1")
        if self.theta not in STABLE_THETAS:
            msg = f"theta={self.theta} is outside the unconditionally stable set {{0, 0.5}}"
            if msg not in self.warnings:
                self.warnings.append(msg)
        try:
            self.model_params()
            self.grid(self.grid_sizes[0])
            SolverConfig(self.tolerance, self.max_iterations)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def schemes(self) -> list[str]:
        return ["LBIE", "LRPI"] if self.scheme == "both" else [self.scheme]

    @property
    def steps(self) -> list[int]:
        return list(self.time_steps) if self.time_steps is not None else list(self.grid_sizes)

    def model_params(self) -> ModelParams:
        if self.test_case == "table1":
            base = ModelParams.test_case_1()
        elif self.test_case == "table4":
            base = ModelParams.test_case_2()
        else:
            base = ModelParams(self.sigma, self.r, self.strike, self.maturity, self.strike * self.s_max_multiple, self.xi or 1.0)
        over = {k: getattr(self, k) for k in ("sigma", "r", "strike", "maturity", "xi") if getattr(self, k) is not None}
        params = dataclasses.replace(base, **over, theta=self.theta)
        return dataclasses.replace(params, s_max=params.strike * self.s_max_multiple)

    def sample_points(self) -> np.ndarray:
        if self.test_case == "table1":
            return 8.0 + 0.5 * np.arange(9)
        if self.test_case == "table4":
            return 80.0 + 5.0 * np.arange(9)
        strike = self.model_params().strike
        return np.linspace(0.8 * strike, 1.2 * strike, 11)[1:-1]

    def grid(self, n: int) -> Grid:
        return Grid(n, rq_factor=self.rq_factor, rw_over_rq=self.rw_over_rq)

    def solver(self) -> SolverConfig:
        return SolverConfig(self.tolerance, self.max_iterations)

    def echo(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("warnings")
        return out


_INT_LISTS = {"grid_sizes", "time_steps"}
_BOOLS = {"american", "richardson"}
_INTS = {"reference_n", "reference_m", "quad_panels", "max_iterations", "workers"}
_FLOATS = {"theta", "xi", "s_max_multiple", "sigma", "r", "strike", "maturity", "rq_factor", "rw_over_rq", "tolerance"}
_STRINGS = {"test_case", "scheme", "reference", "constraint_space", "cache_dir", "output_path"}


def _convert(key: str, raw: str, line_no: int):
    try:
        if key in _INT_LISTS:
            return [int(v) for v in raw.split(",") if v.strip()]
        if key in _BOOLS:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"not a boolean: {raw!r}")
            return low in ("true", "1", "yes")
        if key in _INTS:
            return int(raw)
        if key in _FLOATS:
            return float(raw)
        if key == "reference" and raw.startswith("fine-grid"):
            return "fine-grid"
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: {key}: {exc}") from exc


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {line_no}: expected key = value, got {content!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in _INT_LISTS | _BOOLS | _INTS | _FLOATS | _STRINGS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        values[key] = _convert(key, raw, line_no)
    return ExperimentConfig(**values)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text())


def _reference_key(cfg: ExperimentConfig) -> str:
    payload = {
        "params": dataclasses.asdict(cfg.model_params()),
        "n": cfg.reference_n,
        "m": cfg.reference_m,
        "american": cfg.american,
        "rq_factor": cfg.rq_factor,
        "rw_over_rq": cfg.rw_over_rq,
        "panels": cfg.quad_panels,
        "constraint_space": cfg.constraint_space,
        "points": cfg.sample_points().tolist(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:20]


def reference_prices(cfg: ExperimentConfig, cache_dir: Path | None) -> np.ndarray:
    """Exact prices, or the LBIE fine-grid solution cached on disk."""
    p = cfg.model_params()
    points = cfg.sample_points()
    if cfg.reference == "analytic":
        return bs_put_exact(points, 0.0, p)
    path = None
    if cache_dir is not None:
        path = cache_dir / f"reference_{_reference_key(cfg)}.json"
        if path.is_file():
            return np.array(json.loads(path.read_text())["prices"])
    solution = march(
        "LBIE",
        p,
        cfg.reference_n,
        cfg.reference_m,
        american=cfg.american,
        grid=cfg.grid(cfg.reference_n),
        solver=cfg.solver(),
        panels=cfg.quad_panels,
        constraint_space=cfg.constraint_space,
    )
    prices = evaluate_at(solution, points)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"prices": prices.tolist(), "points": points.tolist()}))
    return prices


def _price_row(cfg: ExperimentConfig, scheme: str, n: int, m: int):
    p = cfg.model_params()
    kwargs = dict(grid=cfg.grid(n), solver=cfg.solver(), panels=cfg.quad_panels)
    start = time.perf_counter()
    if cfg.american and cfg.richardson:
        solution = price_american_richardson(scheme, p, n, m, constraint_space=cfg.constraint_space, **kwargs)
    else:
        solution = march(scheme, p, n, m, american=cfg.american, constraint_space=cfg.constraint_space, **kwargs)
    prices = evaluate_at(solution, cfg.sample_points())
    elapsed = time.perf_counter() - start
    return prices, elapsed, max(solution.iterations, default=0)


def _row_task(args):
    cfg, scheme, n, m = args
    try:
        prices, elapsed, iters = _price_row(cfg, scheme, n, m)
        return {"N": n, "M": m, "prices": prices.tolist(), "cpu": elapsed, "iterations": iters, "error": None}
    except Exception as exc:  # recorded per row, the run continues
        return {"N": n, "M": m, "prices": None, "cpu": math.nan, "iterations": None, "error": f"{type(exc).__name__}: {exc}"}


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.6e}" if isinstance(v, float) else str(v)


def run_experiment(cfg: ExperimentConfig, out_dir: Path | None = None, quiet: bool = False) -> dict:
    """Convergence study: one CSV, one plot-data file per scheme and a JSON summary."""
    out_dir = Path(out_dir or cfg.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(cfg.cache_dir) if cfg.cache_dir else out_dir / "cache"
    reference = reference_prices(cfg, cache_dir)
    summary = {
        "config": cfg.echo(),
        "warnings": list(cfg.warnings),
        "environment": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
        "sample_points": cfg.sample_points().tolist(),
        "reference": reference.tolist(),
        "schemes": {},
    }
    for scheme in cfg.schemes:
        tasks = [(cfg, scheme, n, m) for n, m in zip(cfg.grid_sizes, cfg.steps)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(_row_task, tasks))
        else:
            results = [_row_task(t) for t in tasks]
        rows = []
        prev = None
        for res in results:
            row = {"N": res["N"], "M": res["M"], "RMSError": math.nan, "MaxError": math.nan, "Ratio": None, "CPUTime": res["cpu"]}
            if res["error"] is None:
                rep = error_metrics(np.array(res["prices"]), reference)
                row["RMSError"], row["MaxError"] = rep.rms, rep.max
                if prev is not None and not math.isnan(prev):
                    row["Ratio"] = convergence_ratio(prev, rep.max)
            prev = row["MaxError"]
            rows.append(row)
        csv_path = out_dir / f"convergence_{scheme}.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        with (out_dir / f"convergence_{scheme}.dat").open("w") as fh:
            fh.write("# N MaxError\n")
            for row in rows:
                fh.write(f"{row['N']} {_fmt(row['MaxError'])}\n")
        summary["schemes"][scheme] = [
            {**row, "prices": res["prices"], "max_iterations": res["iterations"], "error": res["error"]} for row, res in zip(rows, results)
        ]
        if not quiet:
            print(f"{scheme}")
            print("  " + "  ".join(f"{c:>12}" for c in CSV_COLUMNS))
            for row in rows:
                print("  " + "  ".join(f"{_fmt(row[c]):>12}" for c in CSV_COLUMNS))
            for res in results:
                if res["error"]:
                    print(f"  N={res['N']}: {res['error']}")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default))
    return summary


def _json_default(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    raise TypeError(type(obj))


def run_price(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False) -> Path:
    """Prices at the sample points for every scheme and grid size."""
    out_dir.mkdir(parents=True, exist_ok=True)
    points = cfg.sample_points()
    path = out_dir / "prices.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "N", "M", "s", "price"])
        for scheme in cfg.schemes:
            for n, m in zip(cfg.grid_sizes, cfg.steps):
                prices, _, _ = _price_row(cfg, scheme, n, m)
                for s, v in zip(points, prices):
                    writer.writerow([scheme, n, m, f"{s:.6g}", f"{v:.12e}"])
                if not quiet:
                    print(f"{scheme} N={n} M={m}: " + " ".join(f"{v:.6f}" for v in prices))
    return path


def run_stability(cfg: ExperimentConfig, out_dir: Path, quiet: bool = False) -> Path:
    """Spectrum of the interior stability matrix for every scheme and grid size."""
    out_dir.mkdir(parents=True, exist_ok=True)
    p = cfg.model_params()
    path = out_dir / "stability.csv"
    cols = ["scheme", "N", "M", "theta", "upsilon_dim", "max_real_part", "amplification_bound", "stable"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for scheme in cfg.schemes:
            for n, m in zip(cfg.grid_sizes, cfg.steps):
                rep = stability_diagnostic(p, n, m, scheme, panels=cfg.quad_panels)
                writer.writerow([scheme, n, m, p.theta, rep.upsilon_dim, _fmt(rep.max_real_part), _fmt(rep.amplification_bound), rep.stable])
                if not quiet:
                    print(f"{scheme} N={n}: max Re(lambda)={rep.max_real_part:.4e} amplification={rep.amplification_bound:.12f} stable={rep.stable}")
    return path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="meshfree-options", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("price", "converge", "stability"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="key = value configuration file")
        cmd.add_argument("--out", help="output directory (overrides output_path)")
        cmd.add_argument("--scheme", choices=["LBIE", "LRPI", "both"], help="override the configured scheme")
        cmd.add_argument("--quiet", action="store_true", help="suppress console tables")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.scheme:
            cfg.scheme = args.scheme
            cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for msg in cfg.warnings:
        warnings.warn(msg, stacklevel=1)
    out_dir = Path(args.out or cfg.output_path)
    if args.command == "converge":
        run_experiment(cfg, out_dir, quiet=args.quiet)
    elif args.command == "price":
        run_price(cfg, out_dir, quiet=args.quiet)
    else:
        run_stability(cfg, out_dir, quiet=args.quiet)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
