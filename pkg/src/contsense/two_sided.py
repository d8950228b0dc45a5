"""Pseudo-density matrix mu_theta(t) of the two-sided master equation.

    d mu/dt = -i H0 mu + i mu (H0 + theta Z) + sum_i G_i D[L_i] mu

with mu(0) the theta = 0 steady state. Two routes are provided: direct
integration of the non-Hermitian equation, and the physical evolution of
the sensor coupled to an auxiliary qubit, from which mu is read off as
twice the <0|.|1> block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liouvillian import JumpTerm, SensorModel, integrate_linear, lindblad_rhs, steady_state
from .spin import SpinBasis

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class PseudoState:
    basis: SpinBasis
    entries: np.ndarray
    theta: float

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))


def zero_mean_generator(model: SensorModel, rho_ss: np.ndarray) -> np.ndarray:
    z = model.generator
    return z - np.trace(z @ rho_ss).real * np.eye(model.dim)


def two_sided_rhs(model: SensorModel, theta: float, mu: np.ndarray,
                  generator: np.ndarray | None = None) -> np.ndarray:
    z = model.generator if generator is None else generator
    out = -1j * (model.h0 @ mu) + 1j * (mu @ (model.h0 + theta * z))
    for jt in model.jumps:
        if jt.rate == 0:
            continue
        L = jt.operator
        LdL = L.conj().T @ L
        out += jt.rate * (L @ mu @ L.conj().T - 0.5 * (LdL @ mu + mu @ LdL))
    return out


def evolve_pseudo(model: SensorModel, theta: float, T: float, tol: float = 1e-12) -> PseudoState:
    """Integrate the two-sided equation directly. No trace renormalization."""
    rho = steady_state(model)
    z = zero_mean_generator(model, rho)
    mu = integrate_linear(lambda m: two_sided_rhs(model, theta, m, z), rho, T, tol)
    return PseudoState(model.basis, mu, theta)


def embedded_model(model: SensorModel, theta: float, generator: np.ndarray | None = None) -> SensorModel:
    """Sensor (x) auxiliary qubit with H_AB = (H0 + ts Z) (x) 1 + td Z (x) sigma_z.

    ts = theta/2 and td = -theta/2 reproduce theta_1 = 0, theta_2 = theta.
    """
    z = model.generator if generator is None else generator
    ts, td = theta / 2, -theta / 2
    eye2 = np.eye(2)
    h = np.kron(model.h0 + ts * z, eye2) + td * np.kron(z, SIGMA_Z)
    jumps = tuple(JumpTerm(np.kron(jt.operator, eye2), jt.rate) for jt in model.jumps)
    return SensorModel(model.basis, h, jumps, np.kron(z, eye2),
                       label=f"embedded[{model.label}]")


def evolve_embedded(model: SensorModel, theta: float, T: float, tol: float = 1e-12) -> PseudoState:
    rho = steady_state(model)
    z = zero_mean_generator(model, rho)
    big = embedded_model(model, theta, z)
    plus = np.full((2, 2), 0.5, dtype=complex)
    rho_ab = integrate_linear(lambda r: lindblad_rhs(big, 0.0, r), np.kron(rho, plus), T, tol)
    mu = 2 * rho_ab[0::2, 1::2]
    return PseudoState(model.basis, mu, theta)
