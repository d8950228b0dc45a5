"""Command-line experiment runner.

    contsense <subcommand> [--config path] [--out path] [--format csv|json]
                           [--threads k] [--tol x]

The config is a single JSON object. Command-line flags override the
matching config keys (``out``, ``format``, ``threads``, ``tol``).
Exit codes: 0 success, 1 verification failure, 2 config error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import json
import math
import re
import sys

import numpy as np

from .acceptance import CRITERIA, run_all
from .correlators import autocorrelator_analytic, autocorrelator_numeric
from .liouvillian import IntegrationError, NonUniqueSteadyState
from .models import TAGS, ModelFamily
from .optimize import OptimizationError, SweepRow, fit_scaling, optimize_gamma
from .qfi import (
    QuadratureError,
    qfi_env_from_correlator,
    qfi_finite_difference,
    qfi_global_from_correlator,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (IntegrationError, NonUniqueSteadyState, OptimizationError, QuadratureError,
                  np.linalg.LinAlgError, FloatingPointError, RuntimeError)
ROUTES = ("analytic", "brute")
_R_FORMULA = re.compile(r"^\s*ln\(\s*(\d*\.?\d*)\s*\*?\s*N\s*\)\s*$")


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest round-trip float text, so identical runs give identical bytes."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def resolve_r(spec, n_qubits: int) -> float:
    """``r`` as a number, or a string ``"ln(aN)"`` evaluated at N."""
    if isinstance(spec, (int, float)):
        return float(spec)
    m = _R_FORMULA.match(str(spec))
    if not m:
        raise ConfigError(f"cannot parse r={spec!r}; use a number or 'ln(aN)'")
    a = float(m.group(1)) if m.group(1) else 1.0
    return math.log(a * n_qubits)


@dataclass
class RunConfig:
    model: str = "high_temperature"
    axis: str = "z"
    params: dict = field(default_factory=dict)
    T: float = 1.0
    gamma: float | None = None
    gamma_bracket: tuple[float, float] = (0.01, 50.0)
    n_gamma: int = 50
    N: int | None = None
    N_list: list[int] = field(default_factory=list)
    route: str = "analytic"
    tol: float = 1e-13
    t_max: float | None = None
    n_t: int = 101
    n_scan: int = 50
    criteria: list[int] = field(default_factory=lambda: list(CRITERIA))
    out: str | None = None
    format: str = "csv"
    threads: int = 1

    @classmethod
    def from_sources(cls, path: str | None, overrides: dict) -> "RunConfig":
        raw = {}
        if path:
            try:
                with open(path) as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            cfg = cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self):
        if self.model not in TAGS:
            raise ConfigError(f"model must be one of {TAGS}")
        if self.route not in ROUTES:
            raise ConfigError(f"route must be one of {ROUTES}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not (isinstance(self.threads, int) and self.threads >= 1):
            raise ConfigError("threads must be a positive integer")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        lo, hi = self.gamma_bracket
        if not 0 < lo <= hi:
            raise ConfigError("gamma_bracket must satisfy 0 < lo <= hi")
        if self.n_gamma < 1 or self.n_t < 2:
            raise ConfigError("n_gamma must be >= 1 and n_t >= 2")

    def family(self, n_qubits: int) -> ModelFamily:
        params = dict(self.params)
        if "r" in params:
            params["r"] = resolve_r(params["r"], n_qubits)
        elif self.model == "spin_squeezer":
            raise ConfigError("spin_squeezer needs params.r")
        try:
            fam = ModelFamily(self.model, n_qubits, self.axis, params)
            if self.model != "independent_array":
                fam.build(1.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return fam

    def single_n(self) -> int:
        if self.N is None:
            raise ConfigError("this command needs N")
        return int(self.N)

    def gamma_grid(self) -> np.ndarray:
        lo, hi = self.gamma_bracket
        if lo == hi or self.n_gamma == 1:
            return np.array([float(lo)])
        return np.geomspace(lo, hi, self.n_gamma)


def _map(fn, items, threads):
    """Order-preserving map over a bounded worker pool."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def write_table(rows: list[dict], columns: list[str], cfg: RunConfig, extra: dict | None = None):
    if cfg.format == "json":
        payload = [{c: _json_value(r[c]) for c in columns} for r in rows]
        if extra is not None:
            payload = {"rows": payload, "summary": {k: _json_value(v) for k, v in extra.items()}}
        text = json.dumps(payload, indent=1, allow_nan=False) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if extra is not None and cfg.format == "csv":
        summary = json.dumps({k: _json_value(v) for k, v in extra.items()}, allow_nan=False)
        if cfg.out:
            with open(cfg.out + ".summary.json", "w") as fh:
                fh.write(summary + "\n")
        print(summary, file=sys.stderr)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _json_fallback(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


# -- subcommands -------------------------------------------------------------

def cmd_sweep_gamma(cfg: RunConfig) -> int:
    fam = cfg.family(cfg.single_n())

    def point(gamma):
        if cfg.route == "analytic":
            corr = fam.analytic_correlator(gamma)
            ie = qfi_env_from_correlator(corr, cfg.T, eligible=True)
            ig = qfi_global_from_correlator(corr, cfg.T)
        else:
            model = fam.build(gamma)
            ie = qfi_finite_difference(model, cfg.T, "environmental", tol=cfg.tol)
            ig = qfi_finite_difference(model, cfg.T, "global", tol=cfg.tol)
        return {"gamma": float(gamma), "gamma_T": float(gamma * cfg.T), "I_E": ie.value,
                "I_G": ig.value, "route": cfg.route,
                "err": max(ie.error_estimate, ig.error_estimate)}

    if cfg.route == "analytic" and fam.tag == "independent_array":
        raise ConfigError("independent_array supports only closed forms; no sweep route")
    rows = _map(point, cfg.gamma_grid(), cfg.threads)
    write_table(rows, ["gamma", "gamma_T", "I_E", "I_G", "route", "err"], cfg)
    return EXIT_OK


def cmd_scaling(cfg: RunConfig) -> int:
    if not cfg.N_list:
        raise ConfigError("N_list is empty")
    fams = [cfg.family(int(n)) for n in cfg.N_list]

    def one(fam):
        return optimize_gamma(fam, cfg.T, cfg.route, bracket=tuple(cfg.gamma_bracket),
                              n_scan=cfg.n_scan, tol=cfg.tol)

    rows: list[SweepRow] = _map(one, fams, cfg.threads)
    summary = fit_scaling(rows)
    write_table([r.as_dict() for r in rows], ["N", "T", "gamma_opt", "qfi_opt", "method",
                                              "error_estimate"], cfg, extra=summary)
    return EXIT_OK


def cmd_correlator(cfg: RunConfig) -> int:
    n = cfg.single_n()
    fam = cfg.family(n)
    if cfg.gamma is None:
        raise ConfigError("correlator needs gamma")
    gamma = float(cfg.gamma)
    t_max = cfg.t_max if cfg.t_max is not None else 5.0 / gamma
    times = np.linspace(0.0, t_max, cfg.n_t)
    num = autocorrelator_numeric(fam.build(gamma), times, tol=cfg.tol)
    try:
        ana = autocorrelator_analytic(fam.analytic_tag, cfg.axis, n, gamma,
                                      eta=cfg.params.get("eta", 0.0))(times)
    except ValueError:
        ana = np.full_like(times, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(num.values - ana) / np.abs(ana)
    rows = [{"t": float(t), "C_numeric": float(c), "C_analytic": float(a), "rel_err": float(e)}
            for t, c, a, e in zip(times, num.values, ana, rel)]
    write_table(rows, ["t", "C_numeric", "C_analytic", "rel_err"], cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    bad = sorted(set(cfg.criteria) - set(CRITERIA))
    if bad:
        raise ConfigError(f"unknown criteria {bad}")
    results = run_all(tuple(sorted(set(cfg.criteria))), tol=cfg.tol,
                      echo=lambda line: print(line, flush=True))
    report = {"passed": all(r.passed for r in results),
              "criteria": [r.as_dict() for r in results]}
    text = json.dumps(report, indent=1, default=_json_fallback)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return EXIT_OK if not failed else EXIT_VERIFY


COMMANDS = {"sweep-gamma": cmd_sweep_gamma, "scaling": cmd_scaling,
            "correlator": cmd_correlator, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contsense", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads", type=int, help="worker pool size")
    p.add_argument("--tol", type=float, help="integration tolerance")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"out": args.out, "format": args.format, "threads": args.threads, "tol": args.tol}
    try:
        cfg = RunConfig.from_sources(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
