"""Collective spin operators in the maximal-J (Dicke) sector.

Basis ordering is fixed: index k holds |J, m> with m = J - k, i.e. m runs
from +J down to -J. Every fixture in the test-suite relies on this order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

AXES = ("x", "y", "z", "plus", "minus")


@dataclass(frozen=True)
class SpinBasis:
    n_qubits: int

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")

    @property
    def total_spin(self) -> Fraction:
        return Fraction(self.n_qubits, 2)

    @property
    def j(self) -> float:
        return self.n_qubits / 2

    @property
    def dim(self) -> int:
        return self.n_qubits + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.j - np.arange(self.dim)

    @property
    def casimir(self) -> float:
        """J(J+1)."""
        return self.j * (self.j + 1)


def build_basis(n_qubits: int) -> SpinBasis:
    return SpinBasis(n_qubits)


def _ladder_plus(basis: SpinBasis) -> np.ndarray:
    j = basis.j
    m = basis.m_values
    jp = np.zeros((basis.dim, basis.dim), dtype=complex)
    # <m+1| J+ |m> sits at row k-1, column k
    for k in range(1, basis.dim):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    return jp


def collective_operator(basis: SpinBasis, axis) -> np.ndarray:
    """Return J_x, J_y, J_z, J_+, J_- or J_r for a unit 3-vector r.

    Parameters
    ----------
    basis : SpinBasis
    axis : str or array_like
        One of ``"x", "y", "z", "plus", "minus"`` or a unit vector.
    """
    if isinstance(axis, str):
        if axis not in AXES:
            raise ValueError(f"unknown axis {axis!r}; expected one of {AXES} or a unit vector")
        jp = _ladder_plus(basis)
        if axis == "plus":
            return jp
        jm = jp.conj().T
        if axis == "minus":
            return jm
        if axis == "x":
            return (jp + jm) / 2
        if axis == "y":
            return (jp - jm) / 2j
        return np.diag(basis.m_values).astype(complex)

    r = np.asarray(axis, dtype=float)
    if r.shape != (3,):
        raise ValueError("axis vector must have three components")
    if abs(np.linalg.norm(r) - 1.0) > 1e-12:
        raise ValueError(f"axis vector must be unit length, |r| = {np.linalg.norm(r)!r}")
    return sum(c * collective_operator(basis, a) for c, a in zip(r, "xyz"))


def is_hermitian(op: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = np.max(np.abs(op)) if op.size else 0.0
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= rtol * max(scale, 1e-300))


def moment(op: np.ndarray, state: np.ndarray) -> tuple[float, float]:
    """Mean and variance of a Hermitian operator in a density matrix."""
    state = np.asarray(state)
    if op.shape != state.shape:
        raise ValueError(f"operator {op.shape} and state {state.shape} dimensions differ")
    tr = np.trace(state)
    if abs(tr - 1) > 1e-8:
        raise ValueError(f"state trace is {tr!r}, expected 1")
    mean = np.trace(op @ state).real
    var = np.trace(op @ op @ state).real - mean**2
    return float(mean), float(var)
