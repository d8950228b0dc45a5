"""One-sided GKSL generators, steady states and propagation.

Superoperators act on column-stacked density matrices,
``vec(rho) = rho.flatten(order="F")``, so that
``vec(A @ X @ B) = kron(B.T, A) @ vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .spin import SpinBasis, is_hermitian

SUPEROPERATOR_CAP = 4096
PSD_TOL = 1e-10
# DOP853 controls the local error; the global error stays below tol with this margin
_LOCAL_TOL_FACTOR = 0.1
# DOP853 refuses relative tolerances below ~100 eps
_RTOL_FLOOR = 3e-14


class NonUniqueSteadyState(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class JumpTerm:
    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"jump rate must be non-negative, got {self.rate}")


@dataclass(frozen=True)
class SensorModel:
    """H = h0 + theta * generator, plus weighted jumps.

    ``rho_ss`` and ``dark_state`` are filled in by the model factories when a
    closed form is known; ``env_eligible`` marks models for which the
    correlator formula for the environmental QFI holds.
    """

    basis: SpinBasis
    h0: np.ndarray
    jumps: tuple[JumpTerm, ...]
    generator: np.ndarray
    label: str = ""
    rho_ss: np.ndarray | None = field(default=None, repr=False)
    dark_state: np.ndarray | None = field(default=None, repr=False)
    env_eligible: bool = False

    def __post_init__(self):
        d = self.h0.shape[0]
        object.__setattr__(self, "jumps", tuple(self.jumps))
        for name, op in [("h0", self.h0), ("generator", self.generator)]:
            if op.shape != (d, d):
                raise ValueError(f"{name} has shape {op.shape}, expected {(d, d)}")
            if not is_hermitian(op):
                raise ValueError(f"{name} must be Hermitian")
        for jt in self.jumps:
            if jt.operator.shape != (d, d):
                raise ValueError("jump operator dimension mismatch")

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def rate_max(self) -> float:
        return max((jt.rate for jt in self.jumps), default=0.0)

    def with_generator(self, generator: np.ndarray) -> "SensorModel":
        return replace(self, generator=generator)


def lindblad_rhs(model: SensorModel, theta: float, rho: np.ndarray) -> np.ndarray:
    """-i[H0 + theta Z, rho] + sum_i G_i D[L_i] rho, in O(dim^3)."""
    if rho.shape != (model.dim, model.dim):
        raise ValueError(f"rho has shape {rho.shape}, model dimension is {model.dim}")
    h = model.h0 + theta * model.generator
    out = -1j * (h @ rho - rho @ h)
    for jt in model.jumps:
        if jt.rate == 0:
            continue
        L = jt.operator
        LdL = L.conj().T @ L
        out += jt.rate * (L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def left_right_superop(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Matrix of X -> left @ X @ right on column-stacked X."""
    return np.kron(right.T, left)


def assemble_superoperator(model: SensorModel, theta: float = 0.0,
                           cap: int = SUPEROPERATOR_CAP) -> np.ndarray:
    d = model.dim
    if d * d > cap:
        raise ValueError(f"superoperator size {d * d} exceeds cap {cap}")
    eye = np.eye(d)
    h = model.h0 + theta * model.generator
    sup = -1j * (left_right_superop(h, eye) - left_right_superop(eye, h))
    for jt in model.jumps:
        L = jt.operator
        LdL = L.conj().T @ L
        sup += jt.rate * (left_right_superop(L, L.conj().T)
                          - 0.5 * left_right_superop(LdL, eye)
                          - 0.5 * left_right_superop(eye, LdL))
    return sup


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape((d, d), order="F")


def project_to_state(rho: np.ndarray) -> np.ndarray:
    """Hermitize, clamp eigenvalues below PSD_TOL and renormalize."""
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w.min() < -PSD_TOL * max(1.0, abs(w).max()):
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def steady_state(model: SensorModel, cap: int = SUPEROPERATOR_CAP) -> np.ndarray:
    """Dissipative steady state at theta = 0.

    Closed forms attached by the factories are returned directly; otherwise
    the null space of the assembled superoperator is used.
    """
    if model.rho_ss is not None:
        return model.rho_ss
    sup = assemble_superoperator(model, 0.0, cap=cap)
    scale = model.rate_max if model.rate_max > 0 else 1.0
    evals = np.linalg.eigvals(sup)
    n_zero = int(np.sum(np.abs(evals) < 1e-10 * scale))
    if n_zero != 1:
        raise NonUniqueSteadyState(
            f"{model.label or 'model'}: {n_zero} eigenvalues with |lambda| < 1e-10 * Gamma_max")
    _, _, vh = np.linalg.svd(sup)
    rho = unvec(vh[-1].conj(), model.dim)
    # the null vector carries an arbitrary phase; fix it through the trace
    return project_to_state(rho / np.trace(rho))


def steady_state_residual(model: SensorModel, rho: np.ndarray) -> float:
    return float(np.max(np.abs(lindblad_rhs(model, 0.0, rho))))


def integrate_linear(action: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, T: float,
                     tol: float, t_eval: Sequence[float] | None = None):
    """Integrate dy/dt = action(y) from 0 to T with adaptive DOP853 steps.

    Returns y(T), or the array of y(t) for every t in ``t_eval`` (leading axis).
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    y0 = np.asarray(y0, dtype=complex)
    shape = y0.shape
    if T == 0:
        if t_eval is None:
            return y0.copy()
        return np.repeat(y0[None], len(t_eval), axis=0)

    def fun(_t, y):
        return action(y.reshape(shape)).ravel()

    local = tol * _LOCAL_TOL_FACTOR
    sol = solve_ivp(fun, (0.0, T), y0.ravel(), method="DOP853", rtol=max(local, _RTOL_FLOOR), atol=local,
                    t_eval=t_eval)
    if sol.status != 0:
        reached = sol.t[-1] if sol.t.size else 0.0
        raise IntegrationError(
            f"integration failed at t={reached:.6g} of T={T:.6g} "
            f"({sol.nfev} rhs evaluations, tol={tol:g}): {sol.message}")
    if t_eval is None:
        return sol.y[:, -1].reshape(shape)
    return np.moveaxis(sol.y, -1, 0).reshape((len(sol.t),) + shape)


def propagate(model: SensorModel, theta: float, rho0: np.ndarray, T: float,
              tol: float = 1e-10, method: str = "rk") -> np.ndarray:
    """Evolve rho0 for time T under the Lindblad equation.

    ``method="rk"`` uses adaptive DOP853 on the action form (default);
    ``method="expm"`` exponentiates the assembled superoperator and serves
    as an exact reference for small dimensions.
    """
    if rho0.shape != (model.dim, model.dim):
        raise ValueError("rho0 dimension mismatch")
    if method == "expm":
        if T < 0:
            raise ValueError("T must be non-negative")
        sup = assemble_superoperator(model, theta)
        return unvec(scipy.linalg.expm(sup * T) @ vec(rho0.astype(complex)), model.dim)
    if method != "rk":
        raise ValueError(f"unknown method {method!r}")
    return integrate_linear(lambda r: lindblad_rhs(model, theta, r), rho0, T, tol)
