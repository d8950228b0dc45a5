"""Global and environmental quantum Fisher information.

Routes:

* finite differences of the fidelities |Tr mu| and Tr sqrt(mu mu^dag)
  (``I = -4 d^2F/dtheta^2`` at theta = 0), the brute-force oracle;
* time-domain quadrature of the stationary correlator;
* frequency-domain filter integrals over the noise spectrum;
* closed forms for exponential correlators.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad, trapezoid

from .correlators import CorrelationModel, SpectrumModel
from .liouvillian import SensorModel, steady_state
from .spin import moment
from .two_sided import PseudoState, evolve_embedded, evolve_pseudo

KINDS = ("global", "environmental")

# Overall constant multiplying T^2 <dZ^2> g(gamma T) for exponential correlators.
# Pinned against the finite-difference oracle (see tests/test_acceptance.py).
ENV_PREFACTOR = 4.0
# Weights of the filter integrals, I = weight * int dw/2pi S[w] f[w, T]
FILTER_WEIGHT = {"global": 8.0, "environmental": 16.0}

_QUAD_EPSREL = 1e-8
_QUAD_EPSABS = 1e-10

# 5-point central second derivative, points (-2h, -h, 0, h, 2h)
_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


class IneligibleModelError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QfiEstimate:
    value: float
    kind: str
    method: str
    theta_step: float | None = None
    error_estimate: float = 0.0
    converged: bool = True


# -- fidelities ------------------------------------------------------------

def _entries(mu) -> np.ndarray:
    return mu.entries if isinstance(mu, PseudoState) else np.asarray(mu)


def fidelity_global(mu) -> float:
    return float(abs(np.trace(_entries(mu))))


def fidelity_env(mu) -> float:
    """Tr sqrt(mu mu^dag) via a Hermitian eigendecomposition."""
    m = _entries(mu)
    try:
        w = np.linalg.eigvalsh(m @ m.conj().T)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition of mu mu^dag failed: {exc}") from exc
    lmax = w.max(initial=0.0)
    w = np.where(w < 1e-14 * lmax, 0.0, w)
    return float(np.sum(np.sqrt(w)))


def fidelity(mu, kind: str) -> float:
    if kind == "global":
        return fidelity_global(mu)
    if kind == "environmental":
        return fidelity_env(mu)
    raise ValueError(f"kind must be one of {KINDS}")


# -- finite-difference oracle ------------------------------------------------

def auto_theta_step(model: SensorModel, T: float) -> float:
    """h = 1e-3 / (T * std(Z)), keeping h^2 I well inside the quadratic regime."""
    _, var = moment(model.generator, steady_state(model))
    return 1e-3 / (T * math.sqrt(max(var, 1e-30)))


def _second_derivative(values: dict, h: float) -> float:
    pts = [values[k * h] for k in (-2, -1, 0, 1, 2)]
    return float(np.dot(_STENCIL, pts) / h**2)


def qfi_finite_difference(model: SensorModel, T: float, kind: str = "environmental",
                          h: float | str = "auto", tol: float = 1e-13,
                          route: str = "embedded", workers: int | None = None) -> QfiEstimate:
    """-4 d^2F/dtheta^2 from a 5-point stencil at steps h and 2h.

    The h-stencil is reported; ``error_estimate`` combines its difference
    from the 2h-stencil with the propagation noise floor.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return QfiEstimate(0.0, kind, "finite_difference", None, 0.0)
    if h == "auto":
        h = auto_theta_step(model, T)
    evolve = {"embedded": evolve_embedded, "direct": evolve_pseudo}[route]
    thetas = [k * h for k in (-4, -2, -1, 0, 1, 2, 4)]

    def f(theta):
        return fidelity(evolve(model, theta, T, tol), kind)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(f, thetas))
    else:
        vals = [f(t) for t in thetas]
    table = dict(zip(thetas, vals))
    fine = -4 * _second_derivative(table, h)
    coarse = -4 * _second_derivative(table, 2 * h)
    noise = 4 * np.abs(_STENCIL).sum() * tol / h**2
    err = max(abs(fine - coarse), noise)
    converged = abs(fine - coarse) <= 0.05 * max(abs(fine), noise)
    return QfiEstimate(fine, kind, "finite_difference", h, err, converged)


# -- correlator routes -------------------------------------------------------

def env_bracket(x: float) -> float:
    """g(x) = 2/x - (3 - 4e^{-x} + e^{-2x}) / x^2, stable for small x."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x < 1e-3:
        return 2 * x / 3 - x**2 / 2 + 7 * x**3 / 30 - x**4 / 12
    a = math.expm1(-x)
    return (2 * x + 2 * a - a * a) / x**2


def _global_bracket(x: float) -> float:
    """(x - 1 + e^{-x}) / x^2."""
    if x < 1e-3:
        return 0.5 - x / 6 + x**2 / 24 - x**3 / 120
    return (x + math.expm1(-x)) / x**2


def _quad(fun, a, b, scale, **kw):
    if b <= a:
        return 0.0
    val, err = quad(fun, a, b, epsabs=_QUAD_EPSABS * scale, epsrel=_QUAD_EPSREL, limit=500, **kw)
    if not np.isfinite(val) or err > max(1e-6 * abs(val), 100 * _QUAD_EPSABS * scale):
        raise QuadratureError(f"quadrature did not converge (value {val:g}, error {err:g})")
    return val


def _check_window(corr: CorrelationModel, t_needed: float):
    if corr.t_max < t_needed * (1 - 1e-12):
        raise ValueError(f"correlator known up to t={corr.t_max:g}, need {t_needed:g}")


def qfi_global_from_correlator(corr: CorrelationModel, T: float) -> QfiEstimate:
    """4 int_0^T dt1 int_0^t1 dt2 C(t2) = 4 int_0^T (T - t) C(t) dt."""
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return QfiEstimate(0.0, "global", "correlator")
    if corr.kind == "exponential":
        val = 4 * corr.c0 * T**2 * _global_bracket(corr.gamma * T)
        return QfiEstimate(val, "global", "closed_form")
    _check_window(corr, T)
    scale = abs(corr.values[0]) * T**2 + 1e-300
    val = 4 * _quad(lambda t: (T - t) * corr(t), 0, T, scale)
    return QfiEstimate(val, "global", "correlator", error_estimate=_QUAD_EPSREL * abs(val))


def qfi_env_from_correlator(corr: CorrelationModel, T: float, eligible: bool = False) -> QfiEstimate:
    """I_G - 4 int_0^T dt1 int_0^t1 dt2 C(t1 + t2).

    Valid only for H0 = 0 with a maximally mixed steady state (Hermitian
    jumps) or a pure dark state; the caller asserts this via ``eligible``.
    """
    if not eligible:
        raise IneligibleModelError(
            "environmental QFI from correlators requires an eligible model "
            "(H0 = 0 and a maximally mixed or pure dark steady state)")
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return QfiEstimate(0.0, "environmental", "correlator")
    if corr.kind == "exponential":
        val = ENV_PREFACTOR * corr.variance * T**2 * env_bracket(corr.gamma * T)
        return QfiEstimate(val, "environmental", "closed_form")
    _check_window(corr, 2 * T)
    ig = qfi_global_from_correlator(corr, T).value
    scale = abs(corr.values[0]) * T**2 + 1e-300
    # int_0^T dt1 int_0^t1 dt2 C(t1+t2) = int_0^2T (min(s, T) - s/2) C(s) ds
    second = (_quad(lambda s: 0.5 * s * corr(s), 0, T, scale)
              + _quad(lambda s: (T - 0.5 * s) * corr(s), T, 2 * T, scale))
    val = ig - 4 * second
    return QfiEstimate(val, "environmental", "correlator",
                       error_estimate=_QUAD_EPSREL * (abs(ig) + 4 * abs(second)))


def qfi_env_exponential(variance: float, rate: float, T: float) -> float:
    return ENV_PREFACTOR * variance * T**2 * env_bracket(rate * T)


# -- filter functions and spectra -------------------------------------------

def filter_global(omega, T):
    """sin^2(wT/2) / w^2 (Ramsey filter), T^2/4 at w = 0."""
    w = np.asarray(omega, dtype=float)
    half = 0.5 * T * np.sinc(w * T / (2 * np.pi))
    return half**2


def filter_env(omega, T):
    """sin^4(wT/2) / w^2, vanishing at w = 0."""
    w = np.asarray(omega, dtype=float)
    s = np.sin(w * T / 2)
    return s**2 * filter_global(w, T)


_FILTERS = {"global": filter_global, "environmental": filter_env}
# sin^2(wT/2) = (1 - cos wT)/2 ; sin^4(wT/2) = (3 - 4 cos wT + cos 2wT)/8
_FOURIER_COEFFS = {"global": (0.5, [(-0.5, 1.0)]),
                   "environmental": (3 / 8, [(-0.5, 1.0), (1 / 8, 2.0)])}


def qfi_from_spectrum(spec: SpectrumModel, T: float, kind: str = "global") -> QfiEstimate:
    """weight * int dw/2pi S[w] f[w, T] with weight 8 (global) or 16 (environmental).

    Lorentzian tails beyond a cutoff are integrated as Fourier integrals of
    S[w]/w^2 (QUADPACK QAWF), so no truncation of the oscillating tail.
    Sampled spectra are integrated panel by panel over their grid and
    treated as zero beyond it.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return QfiEstimate(0.0, kind, "spectrum")
    filt = _FILTERS[kind]
    if spec.kind == "sampled":
        fine, coarse = (_panel_integral(spec, filt, T, k) for k in (8, 4))
        val = FILTER_WEIGHT[kind] * 2 * fine / (2 * np.pi)
        err = FILTER_WEIGHT[kind] * 2 * abs(fine - coarse) / (2 * np.pi)
        return QfiEstimate(val, kind, "spectrum", error_estimate=err)
    if spec.c0 == 0:
        return QfiEstimate(0.0, kind, "spectrum")
    scale = max(spec.c0, 1e-300) * T**2
    cut = max(20.0 / T, 20.0 * spec.gamma)
    n_osc = max(1, int(cut * T / np.pi))
    pts = np.linspace(0.0, cut, min(n_osc, 2000) + 1)
    body = sum(_quad(lambda w: spec(w) * filt(w, T), a, b, scale) for a, b in zip(pts[:-1], pts[1:]))
    const, terms = _FOURIER_COEFFS[kind]
    base = lambda w: spec(w) / w**2  # noqa: E731
    tail = const * _quad(base, cut, np.inf, scale)
    for coef, k in terms:
        val, err = quad(base, cut, np.inf, weight="cos", wvar=k * T, limlst=200)
        tail += coef * val
    integral = 2 * (body + tail)  # symmetric spectrum
    val = FILTER_WEIGHT[kind] * integral / (2 * np.pi)
    return QfiEstimate(val, kind, "spectrum", error_estimate=_QUAD_EPSREL * abs(val))


def _panel_integral(spec: SpectrumModel, filt, T: float, order: int) -> float:
    """int_0^wmax S f dw with Gauss-Legendre panels on each grid interval.

    S is piecewise linear between samples, so panels aligned with the grid
    see a smooth integrand.
    """
    x, wts = np.polynomial.legendre.leggauss(order)
    w = spec.omegas
    a, b = w[:-1, None], w[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    vals = spec(nodes) * filt(nodes, T)
    return float(np.sum(0.5 * (b - a) * (vals * wts)))


def sensitivity(source) -> float:
    """Long-time QFI growth rate 2 S[0] = 4 int_0^inf C(t) dt."""
    if isinstance(source, SpectrumModel):
        return 2 * float(source(0.0))
    if source.kind == "exponential":
        if source.c0 == 0:
            return 0.0
        if source.gamma == 0:
            raise ValueError("non-decaying correlator: sensitivity diverges")
        return 4 * source.c0 / source.gamma
    tail = abs(source.values[-1])
    if tail > 1e-6 * abs(source.values[0]):
        raise ValueError("sampled correlator has not decayed inside its window; "
                         "sensitivity integral does not converge")
    return 4 * float(trapezoid(source.values, source.times))


# -- bounds ---------------------------------------------------------------

def bound_loose(n_qubits: int, T: float) -> float:
    return float(n_qubits**2 * T**2)


def env_filter_peak(tol: float = 1e-12) -> tuple[float, float]:
    """Locate the maximum of f_E numerically.

    Returns ``(w_c T, 4 f_E(w_c, T) / T^2)``; both are T-independent.
    """
    from .optimize import golden_section_max
    # coarse scan brackets the first lobe, where the global maximum sits
    grid = np.linspace(0.05, 2 * np.pi, 400)
    vals = filter_env(grid, 1.0)
    k = int(np.argmax(vals))
    x, fx = golden_section_max(lambda w: float(filter_env(w, 1.0)), grid[max(k - 1, 0)],
                               grid[min(k + 1, grid.size - 1)], xtol=tol)
    return x, 4 * fx


def bound_tight(n_qubits: int, T: float) -> float:
    """(1/2) max_w [4 f_E/T^2] N^2 T^2, about 0.2625 N^2 T^2."""
    _, peak = env_filter_peak()
    return 0.5 * peak * n_qubits**2 * T**2
