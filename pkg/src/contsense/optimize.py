"""Optimizing the environmental QFI over the coupling rate, and N-scaling sweeps."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
import math
from typing import Callable, Sequence

import numpy as np

from .models import ModelFamily
from .qfi import (
    ENV_PREFACTOR,
    env_bracket,
    qfi_env_from_correlator,
    qfi_finite_difference,
)

_INVPHI = (math.sqrt(5) - 1) / 2
ROUTES = ("analytic", "brute")


class OptimizationError(RuntimeError):
    pass


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       xtol: float = 1e-8, max_iter: int = 500) -> tuple[float, float]:
    """Maximize a unimodal f on [a, b]; returns (x, f(x))."""
    if not a < b:
        raise OptimizationError(f"invalid bracket [{a}, {b}]")
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_dimensionless_g(lo: float = 0.1, hi: float = 20.0, xtol: float = 1e-8) -> tuple[float, float]:
    """Maximizer x* and value g(x*) of the environmental bracket g(x)."""
    grid = np.linspace(lo, hi, 2001)
    vals = np.array([env_bracket(x) for x in grid])
    k = int(np.argmax(vals))
    if k in (0, grid.size - 1):
        raise OptimizationError("maximum of g lies on the bracket edge")
    return golden_section_max(env_bracket, grid[k - 1], grid[k + 1], xtol=xtol)


@dataclass(frozen=True)
class SweepRow:
    N: int
    T: float
    gamma_opt: float
    qfi_opt: float
    method: str
    error_estimate: float

    def as_dict(self) -> dict:
        return asdict(self)


def qfi_env_at(family: ModelFamily, gamma: float, T: float, route: str,
               tol: float = 1e-13, workers: int | None = None):
    """Environmental QFI of ``family`` at coupling ``gamma`` by the chosen route."""
    if route == "analytic":
        if family.tag == "independent_array":
            raise ValueError("independent_array has no correlator family")
        return qfi_env_from_correlator(family.analytic_correlator(gamma), T, eligible=True)
    if route == "brute":
        return qfi_finite_difference(family.build(gamma), T, "environmental", tol=tol,
                                     workers=workers)
    raise ValueError(f"route must be one of {ROUTES}")


def _check_unimodal(values: np.ndarray, rtol: float = 1e-6) -> None:
    k = int(np.argmax(values))
    peak = values[k]
    noise = rtol * abs(peak)
    left = np.diff(values[: k + 1])
    right = np.diff(values[k:])
    if np.any(left < -noise) or np.any(right > noise):
        raise OptimizationError("coarse scan is not unimodal: "
                                + ", ".join(f"{v:.6g}" for v in values))
    if k in (0, values.size - 1):
        raise OptimizationError("maximum lies on the edge of the Gamma*T bracket")


def optimize_gamma(family: ModelFamily, T: float, route: str = "analytic",
                   bracket: tuple[float, float] = (0.01, 50.0), n_scan: int = 50,
                   rtol: float = 1e-4, tol: float = 1e-13,
                   workers: int | None = None) -> SweepRow:
    """Maximize I_E over Gamma at fixed T.

    A log-spaced scan over Gamma*T in ``bracket`` checks unimodality and
    brackets the peak; golden section on log(Gamma) refines it to ``rtol``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if route == "analytic" and family.tag != "independent_array":
        # exponential correlator: the optimum is x*/(rate multiplier T)
        xs, gs = maximize_dimensionless_g()
        corr = family.analytic_correlator(1.0)
        gamma = xs / (corr.gamma * T)
        val = ENV_PREFACTOR * corr.variance * T**2 * gs
        return SweepRow(family.n_qubits, T, gamma, val, "analytic", 0.0)

    def objective(log_g):
        return qfi_env_at(family, math.exp(log_g), T, route, tol, workers).value

    grid = np.linspace(math.log(bracket[0] / T), math.log(bracket[1] / T), n_scan)
    vals = np.array([objective(x) for x in grid])
    _check_unimodal(vals)
    k = int(np.argmax(vals))
    lg, _ = golden_section_max(objective, grid[k - 1], grid[k + 1], xtol=rtol)
    gamma = math.exp(lg)
    est = qfi_env_at(family, gamma, T, route, tol, workers)
    return SweepRow(family.n_qubits, T, gamma, est.value, route, est.error_estimate)


def scaling_sweep(make_family: Callable[[int], ModelFamily], n_list: Sequence[int], T: float,
                  route: str = "analytic", workers: int | None = None, **kw):
    """Optimize each N; fit log(qfi_opt) ~ log(N) and qfi_opt ~ c J(J+1).

    Returns ``(rows, summary)`` with summary keys ``exponent`` and
    ``casimir_coefficient``.
    """
    n_list = list(n_list)
    if not n_list:
        raise ValueError("empty N list")

    def one(n):
        return optimize_gamma(make_family(n), T, route, **kw)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, n_list))
    else:
        rows = [one(n) for n in n_list]
    summary = fit_scaling(rows)
    return rows, summary


def fit_scaling(rows: Sequence[SweepRow]) -> dict:
    n = np.array([r.N for r in rows], dtype=float)
    q = np.array([r.qfi_opt for r in rows])
    exponent = float(np.polyfit(np.log(n), np.log(q), 1)[0]) if len(rows) > 1 else float("nan")
    cas = (n / 2) * (n / 2 + 1)
    coeff = float(np.dot(cas, q) / np.dot(cas, cas))
    T = rows[0].T
    return {"exponent": exponent, "casimir_coefficient": coeff,
            "casimir_coefficient_per_T2": coeff / T**2, "T": T, "n_rows": len(rows)}
