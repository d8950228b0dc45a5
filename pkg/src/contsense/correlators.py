"""Symmetrized stationary autocorrelators C_ZZ(t) = <{Z(t), Z(0)}> - 2<Z>^2."""
from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .liouvillian import SensorModel, integrate_linear, lindblad_rhs, steady_state
from .spin import build_basis, moment

ANALYTIC_TAGS = ("high_temperature", "dephasing_family", "spin_squeezer_large_r",
                 "single_qubit_loss")


class SpectrumWindowingWarning(UserWarning):
    """Spectrum obtained from a correlator sampled on a finite window."""


@dataclass(frozen=True)
class CorrelationModel:
    """Either ``C(t) = c0 exp(-gamma |t|)`` or samples on a grid starting at t = 0."""

    kind: str
    variance: float
    c0: float | None = None
    gamma: float | None = None
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @classmethod
    def exponential(cls, c0: float, gamma: float) -> "CorrelationModel":
        if gamma < 0:
            raise ValueError("decay rate must be non-negative")
        return cls("exponential", variance=c0 / 2, c0=float(c0), gamma=float(gamma))

    @classmethod
    def sampled(cls, times, values, variance: float | None = None) -> "CorrelationModel":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 4:
            raise ValueError("need matching 1-d time and value arrays with at least 4 samples")
        if times[0] != 0 or np.any(np.diff(times) <= 0):
            raise ValueError("sample times must start at 0 and increase strictly")
        if variance is None:
            variance = values[0] / 2
        return cls("sampled", variance=float(variance), times=times, values=values)

    @property
    def t_max(self) -> float:
        return np.inf if self.kind == "exponential" else float(self.times[-1])

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == "exponential":
            return self.c0 * np.exp(-self.gamma * t)
        if np.any(t > self.times[-1] * (1 + 1e-12)):
            raise ValueError(f"correlator sampled only up to t={self.times[-1]:g}")
        return self._spline(np.minimum(t, self.times[-1]))

    @property
    def _spline(self):
        sp = self.__dict__.get("_cached_spline")
        if sp is None:
            sp = CubicSpline(self.times, self.values)
            object.__setattr__(self, "_cached_spline", sp)
        return sp


@dataclass(frozen=True)
class SpectrumModel:
    """Symmetric noise spectrum S[w] = int dt C(t) e^{iwt}.

    ``kind="lorentzian"``: S = 2 c0 gamma / (gamma^2 + w^2).
    ``kind="sampled"``: values on a non-negative frequency grid, mirrored.
    """

    kind: str
    c0: float | None = None
    gamma: float | None = None
    omegas: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "sampled":
            w = np.asarray(self.omegas, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if w[0] != 0 or np.any(np.diff(w) <= 0):
                raise ValueError("sampled spectrum needs an increasing grid starting at w = 0")
            if np.any(v < -1e-12 * max(1.0, np.abs(v).max())):
                raise ValueError("spectrum must be non-negative")

    @property
    def symmetric(self) -> bool:
        return True

    @property
    def omega_max(self) -> float:
        return np.inf if self.kind == "lorentzian" else float(self.omegas[-1])

    def __call__(self, omega):
        w = np.abs(np.asarray(omega, dtype=float))
        if self.kind == "lorentzian":
            return 2 * self.c0 * self.gamma / (self.gamma**2 + w**2)
        return np.interp(w, self.omegas, self.values, right=0.0)


def autocorrelator_numeric(model: SensorModel, times, tol: float = 1e-12) -> CorrelationModel:
    """Quantum-regression correlator of the model's generator on ``times``.

    The anticommutator initial condition Z rho + rho Z is propagated once
    under the theta = 0 Lindbladian.
    """
    times = np.asarray(times, dtype=float)
    rho = steady_state(model)
    z = model.generator
    mean, var = moment(z, rho)
    x0 = z @ rho + rho @ z
    traj = integrate_linear(lambda x: lindblad_rhs(model, 0.0, x), x0, float(times[-1]), tol,
                            t_eval=times)
    vals = np.einsum("ij,tji->t", z, traj) - 2 * mean**2
    scale = max(abs(vals[0]), 1e-300)
    if np.max(np.abs(vals.imag)) > 1e-8 * scale:
        raise RuntimeError("regression correlator is not real; check the generator is Hermitian")
    return CorrelationModel.sampled(times, vals.real, variance=var)


def autocorrelator_analytic(tag: str, axis: str, n_qubits: int, gamma: float,
                            eta: float = 0.0) -> CorrelationModel:
    """Exponential correlators known in closed form.

    high_temperature: variance J(J+1)/3, rates G (x, y) and 2G (z).
    dephasing_family: rates G(1-eta) (x), G(1+eta) (y), 2G (z).
    spin_squeezer_large_r: x axis only, variance J(J+1)/2, rate 2G
    (second-order cumulant closure, large r).
    single_qubit_loss: x or y axis, variance 1/4, rate G/2.
    """
    if tag not in ANALYTIC_TAGS:
        raise ValueError(f"unknown model tag {tag!r}; expected one of {ANALYTIC_TAGS}")
    if axis not in ("x", "y", "z"):
        raise ValueError(f"analytic correlators are available for x, y, z axes, not {axis!r}")
    cas = build_basis(n_qubits).casimir
    if tag == "spin_squeezer_large_r":
        if axis != "x":
            raise ValueError("the large-r squeezer correlator is only available for the x axis")
        return CorrelationModel.exponential(2 * cas / 2, 2 * gamma)
    if tag == "single_qubit_loss":
        if n_qubits != 1 or axis == "z":
            raise ValueError("single_qubit_loss correlator needs N = 1 and a transverse axis")
        return CorrelationModel.exponential(2 * 0.25, gamma / 2)
    if tag == "high_temperature":
        eta = 0.0
    elif not -1 < eta < 1:
        raise ValueError(f"eta must lie in (-1, 1), got {eta}")
    rate = {"x": gamma * (1 - eta), "y": gamma * (1 + eta), "z": 2 * gamma}[axis]
    return CorrelationModel.exponential(2 * cas / 3, rate)


def lorentzian_spectrum(corr: CorrelationModel, omegas=None) -> SpectrumModel:
    """Spectrum of an exponential correlator.

    A sampled correlator is cosine-transformed over its window instead; the
    truncation at ``t_max`` is flagged with SpectrumWindowingWarning.
    """
    if corr.kind == "exponential":
        return SpectrumModel("lorentzian", c0=corr.c0, gamma=corr.gamma)
    warnings.warn("spectrum of a sampled correlator is truncated at the sampling window",
                  SpectrumWindowingWarning, stacklevel=2)
    tmax = corr.t_max
    if omegas is None:
        omegas = np.linspace(0.0, 200.0 / tmax, 4001)
    vals = [2 * quad(corr, 0, tmax, weight="cos", wvar=w, limit=400)[0] for w in omegas]
    return SpectrumModel("sampled", omegas=np.asarray(omegas, dtype=float),
                         values=np.clip(vals, 0.0, None))


def fit_decay_rate(corr: CorrelationModel, t_max: float) -> float:
    """Least-squares exponential rate of C(t) over the samples in [0, t_max]."""
    if corr.kind == "exponential":
        return corr.gamma
    mask = corr.times <= t_max * (1 + 1e-12)
    t, v = corr.times[mask], corr.values[mask]
    if np.any(v <= 0):
        raise ValueError("correlator changes sign inside the fit window")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return float(-slope)
