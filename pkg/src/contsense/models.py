"""Sensor model factories and model-specific closed forms."""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg

from .liouvillian import JumpTerm, SensorModel, project_to_state
from .spin import build_basis, collective_operator

TAGS = ("high_temperature", "dephasing_family", "spin_squeezer",
        "single_qubit_loss", "independent_array")


def centered_generator(basis, axis, rho_ss: np.ndarray) -> np.ndarray:
    """Collective operator along ``axis`` shifted to zero steady-state mean."""
    z = collective_operator(basis, axis)
    mean = np.trace(z @ rho_ss).real
    return z - mean * np.eye(basis.dim)


def _check_rate(gamma):
    if not gamma > 0:
        raise ValueError(f"Gamma must be positive, got {gamma}")


def high_temperature(n_qubits: int, gamma: float, axis="z", hermitian_form: bool = False) -> SensorModel:
    """Balanced collective loss and pumping, G D[J-] + G D[J+].

    With ``hermitian_form=True`` the same generator is written with the
    Hermitian jumps 2G D[J_x] + 2G D[J_y].
    """
    _check_rate(gamma)
    b = build_basis(n_qubits)
    if hermitian_form:
        jumps = (JumpTerm(collective_operator(b, "x"), 2 * gamma),
                 JumpTerm(collective_operator(b, "y"), 2 * gamma))
    else:
        jumps = (JumpTerm(collective_operator(b, "minus"), gamma),
                 JumpTerm(collective_operator(b, "plus"), gamma))
    rho = np.eye(b.dim, dtype=complex) / b.dim
    return SensorModel(b, np.zeros((b.dim, b.dim), dtype=complex), jumps,
                       centered_generator(b, axis, rho),
                       label=f"high_temperature(N={n_qubits}, Gamma={gamma:g})",
                       rho_ss=rho, env_eligible=True)


def dephasing_family(n_qubits: int, gamma: float, eta: float, axis="z") -> SensorModel:
    """2(1+eta) G D[J_x] + 2(1-eta) G D[J_y]; eta = 0 is the high-temperature model."""
    _check_rate(gamma)
    if not -1 < eta < 1:
        raise ValueError(f"eta must lie in (-1, 1), got {eta}")
    b = build_basis(n_qubits)
    jumps = (JumpTerm(collective_operator(b, "x"), 2 * (1 + eta) * gamma),
             JumpTerm(collective_operator(b, "y"), 2 * (1 - eta) * gamma))
    rho = np.eye(b.dim, dtype=complex) / b.dim
    return SensorModel(b, np.zeros((b.dim, b.dim), dtype=complex), jumps,
                       centered_generator(b, axis, rho),
                       label=f"dephasing_family(N={n_qubits}, Gamma={gamma:g}, eta={eta:g})",
                       rho_ss=rho, env_eligible=True)


def squeezer_jump(basis, r: float) -> np.ndarray:
    return collective_operator(basis, "plus") - math.tanh(r) * collective_operator(basis, "minus")


def dark_kernel(L: np.ndarray) -> np.ndarray:
    """Normalized null vector of L, requiring a clean one-dimensional kernel."""
    _, s, vh = np.linalg.svd(L)
    smax = s[0]
    if smax == 0 or not (s[-1] <= 1e-12 * smax and s[-2] >= 1e-6 * smax):
        raise ValueError(
            f"jump operator kernel is not one-dimensional (singular values {s[-2]:.3e}, {s[-1]:.3e})")
    psi = vh[-1].conj()
    # fix the global phase: largest component real positive
    k = np.argmax(np.abs(psi))
    return psi * (abs(psi[k]) / psi[k])


def spin_squeezer(n_qubits: int, gamma: float, r: float, axis="x") -> SensorModel:
    """G D[J+ - tanh(r) J-].

    Even N: pure dark steady state from the kernel of the jump operator.
    Odd N: rho_0 proportional to (L^dag L)^{-1}; not eligible for the
    correlator formula of the environmental QFI.
    """
    _check_rate(gamma)
    if r < 0:
        raise ValueError(f"squeezing parameter r must be >= 0, got {r}")
    b = build_basis(n_qubits)
    L = squeezer_jump(b, r)
    zero = np.zeros((b.dim, b.dim), dtype=complex)
    label = f"spin_squeezer(N={n_qubits}, Gamma={gamma:g}, r={r:g})"
    if n_qubits % 2 == 0:
        psi = dark_kernel(L)
        rho = np.outer(psi, psi.conj())
        return SensorModel(b, zero, (JumpTerm(L, gamma),), centered_generator(b, axis, rho),
                           label=label, rho_ss=rho, dark_state=psi, env_eligible=True)
    LdL = L.conj().T @ L
    inv = scipy.linalg.solve(LdL, np.eye(b.dim), assume_a="her")
    rho = project_to_state(inv)
    return SensorModel(b, zero, (JumpTerm(L, gamma),), centered_generator(b, axis, rho),
                       label=label, rho_ss=rho, env_eligible=False)


def single_qubit_loss(gamma: float, axis="x") -> SensorModel:
    """One qubit with G D[sigma_-]; the generator is J_x = sigma_x / 2 by default."""
    _check_rate(gamma)
    b = build_basis(1)
    psi = np.array([0, 1], dtype=complex)  # |J, -J>, the ground state
    rho = np.outer(psi, psi.conj())
    return SensorModel(b, np.zeros((2, 2), dtype=complex),
                       (JumpTerm(collective_operator(b, "minus"), gamma),),
                       centered_generator(b, axis, rho),
                       label=f"single_qubit_loss(Gamma={gamma:g})",
                       rho_ss=rho, dark_state=psi, env_eligible=True)


def single_qubit_loss_qfi(gamma: float, T: float) -> float:
    """Closed-form environmental QFI of a decaying qubit for Z = sigma_x / 2.

    4T/G + 16 e^{-GT/2}/G^2 - 4 e^{-GT}/G^2 - 12/G^2, evaluated without
    cancellation at small GT.
    """
    _check_rate(gamma)
    x = gamma * T
    if x < 1e-2:
        poly = x**3 / 3 - x**4 / 8 + 7 * x**5 / 240 - x**6 / 192 + 31 * x**7 / 40320
    else:
        a = math.expm1(-x / 2)
        poly = 4 * x + 8 * a - 4 * a * a
    return poly / gamma**2


def single_qubit_loss_sensitivity(gamma: float) -> float:
    _check_rate(gamma)
    return 4.0 / gamma


def independent_array_qfi(n_qubits: int, gamma: float, T: float) -> float:
    """N independent decaying qubits at rate G/N; QFI is additive."""
    return n_qubits * single_qubit_loss_qfi(gamma / n_qubits, T)


def independent_array_sensitivity(n_qubits: int, gamma: float) -> float:
    """4 N^2 / G."""
    return n_qubits * single_qubit_loss_sensitivity(gamma / n_qubits)


@dataclass(frozen=True)
class ModelFamily:
    """A model tag with every parameter fixed except the coupling rate Gamma."""

    tag: str
    n_qubits: int
    axis: str = "z"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown model tag {self.tag!r}; expected one of {TAGS}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        eta = self.params.get("eta", 0.0)
        if self.tag == "dephasing_family" and not -1 < eta < 1:
            raise ValueError(f"eta must lie in (-1, 1), got {eta}")
        if self.tag == "spin_squeezer" and self.params.get("r", 0.0) < 0:
            raise ValueError("r must be >= 0")

    def build(self, gamma: float) -> SensorModel:
        if self.tag == "high_temperature":
            return high_temperature(self.n_qubits, gamma, self.axis)
        if self.tag == "dephasing_family":
            return dephasing_family(self.n_qubits, gamma, self.params.get("eta", 0.0), self.axis)
        if self.tag == "spin_squeezer":
            return spin_squeezer(self.n_qubits, gamma, self.params["r"], self.axis)
        if self.tag == "single_qubit_loss":
            return single_qubit_loss(gamma, self.axis)
        raise ValueError(f"{self.tag} has no collective-spin model; only closed forms are available")

    @property
    def analytic_tag(self) -> str:
        return "spin_squeezer_large_r" if self.tag == "spin_squeezer" else self.tag

    def analytic_correlator(self, gamma: float):
        from .correlators import autocorrelator_analytic
        return autocorrelator_analytic(self.analytic_tag, self.axis, self.n_qubits, gamma,
                                       eta=self.params.get("eta", 0.0))

    def rate_multiplier(self) -> float:
        """Correlator decay rate divided by Gamma."""
        return self.analytic_correlator(1.0).gamma
