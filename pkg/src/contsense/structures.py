"""Coherent absorber for the high-temperature sensor, and no-click photodetection.

The absorber B is a copy of the sensor A driven by A's output fields. Each
of the two channels is a pair (c_A, c_B), with total jump L = c_A + c_B, and
the cascade contributes H = (1/2i)(c_B^dag c_A - c_A^dag c_B) per channel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liouvillian import JumpTerm, SensorModel, integrate_linear
from .spin import SpinBasis, build_basis, collective_operator

DARK_TOL = 1e-12
_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


class NotDarkError(ValueError):
    """Raised for models whose steady state is not a pure dark state."""


@dataclass(frozen=True)
class CascadedModel:
    basis: SpinBasis
    h_csc: np.ndarray
    jumps: tuple[np.ndarray, ...]
    dark_state: np.ndarray

    def residuals(self) -> dict:
        psi = self.dark_state
        out = {"h_csc": float(np.linalg.norm(self.h_csc @ psi))}
        for k, L in enumerate(self.jumps, start=1):
            out[f"L{k}"] = float(np.linalg.norm(L @ psi))
        return out

    def as_sensor_model(self, gamma: float, axis="z") -> SensorModel:
        """Sensor A plus absorber B, with the generator acting on A only."""
        d = self.basis.dim
        z = np.kron(collective_operator(self.basis, axis), np.eye(d))
        rho = np.outer(self.dark_state, self.dark_state.conj())
        z = z - np.trace(z @ rho).real * np.eye(d * d)
        return SensorModel(self.basis, self.h_csc, tuple(JumpTerm(L, gamma) for L in self.jumps),
                           z, label=f"absorber(N={self.basis.n_qubits}, Gamma={gamma:g})",
                           rho_ss=rho, dark_state=self.dark_state, env_eligible=True)


def cascade_hamiltonian(channels) -> np.ndarray:
    """sum over channels of (1/2i)(c_B^dag c_A - c_A^dag c_B)."""
    h = 0
    for c_a, c_b in channels:
        h = h + (c_b.conj().T @ c_a - c_a.conj().T @ c_b) / 2j
    return h


def exchange_hamiltonian(basis: SpinBasis) -> np.ndarray:
    """-(i/2)(J- (x) J+ - J+ (x) J-), the flip-flop coupling between A and B.

    Kept for comparison: it does not annihilate the absorber dark state for
    N >= 2 (see ``build_absorber``).
    """
    jp = collective_operator(basis, "plus")
    jm = collective_operator(basis, "minus")
    return -0.5j * (np.kron(jm, jp) - np.kron(jp, jm))


def partial_trace_b(psi: np.ndarray, d: int) -> np.ndarray:
    m = psi.reshape(d, d)
    return m @ m.conj().T


def build_absorber(n_qubits: int) -> CascadedModel:
    """Absorber for G D[J-] + G D[J+].

    L1 = J+ (x) 1 - 1 (x) J-, L2 = J- (x) 1 - 1 (x) J+, dark state
    sum_n |n>|n> / sqrt(2J+1). The cascade Hamiltonian of these two channels
    cancels identically, so h_csc is the zero matrix.
    """
    b = build_basis(n_qubits)
    d = b.dim
    jp = collective_operator(b, "plus")
    jm = collective_operator(b, "minus")
    eye = np.eye(d)
    channels = [(np.kron(jp, eye), -np.kron(eye, jm)),
                (np.kron(jm, eye), -np.kron(eye, jp))]
    jumps = tuple(a + c for a, c in channels)
    h = cascade_hamiltonian(channels).astype(complex)
    psi = np.eye(d, dtype=complex).ravel() / np.sqrt(d)
    model = CascadedModel(b, h, jumps, psi)
    res = model.residuals()
    if max(res.values()) > DARK_TOL * max(1.0, b.casimir):
        raise RuntimeError(f"absorber dark-state residuals too large: {res}")
    return model


def _require_dark(model: SensorModel) -> np.ndarray:
    psi = model.dark_state
    if psi is None:
        raise NotDarkError(f"{model.label or 'model'} has no pure dark steady state")
    scale = max(1.0, np.abs(model.generator).max())
    for jt in model.jumps:
        if np.linalg.norm(jt.operator @ psi) > 1e-10 * scale:
            raise NotDarkError("stored dark state is not annihilated by the jump operators")
    return psi


def effective_hamiltonian(model: SensorModel) -> np.ndarray:
    """H0 - (i/2) sum_i G_i L_i^dag L_i."""
    h = model.h0.astype(complex)
    for jt in model.jumps:
        h = h - 0.5j * jt.rate * (jt.operator.conj().T @ jt.operator)
    return h


def no_click_probability(model: SensorModel, theta: float, T: float, tol: float = 1e-12) -> float:
    """||exp(-i (H_eff + theta Z) T) |Psi>||^2, the probability of no photon in [0, T]."""
    psi = _require_dark(model)
    if T < 0:
        raise ValueError("T must be non-negative")
    heff = effective_hamiltonian(model) + theta * model.generator
    out = integrate_linear(lambda v: -1j * (heff @ v), psi, T, tol)
    p0 = float(np.vdot(out, out).real)
    if p0 > 1 + 10 * tol:
        raise RuntimeError(f"no-click probability {p0!r} exceeds 1; integration is inaccurate")
    return p0


def classical_fisher_binary(model: SensorModel, T: float, h: float | None = None,
                            tol: float = 1e-13) -> float:
    """-4 C2 for P0 = 1 + C2 theta^2, i.e. -2 P0'' at theta = 0.

    The 5-point stencil is evaluated at h and 2h; a mismatch above 1% raises.
    """
    psi = _require_dark(model)
    if T == 0:
        return 0.0
    if h is None:
        z = model.generator
        var = float(np.vdot(psi, z @ z @ psi).real - np.vdot(psi, z @ psi).real ** 2)
        h = 1e-3 / (T * np.sqrt(max(var, 1e-30)))
    p = {k: no_click_probability(model, k * h, T, tol) for k in (-4, -2, -1, 0, 1, 2, 4)}
    fine = -2 * np.dot(_STENCIL, [p[k] for k in (-2, -1, 0, 1, 2)]) / h**2
    coarse = -2 * np.dot(_STENCIL, [p[k] for k in (-4, -2, 0, 2, 4)]) / (2 * h) ** 2
    noise = 2 * np.abs(_STENCIL).sum() * tol / h**2
    if abs(fine - coarse) > 0.01 * abs(fine) + noise:
        raise RuntimeError(f"no-click stencil did not converge ({fine:.6g} vs {coarse:.6g})")
    return float(fine)
