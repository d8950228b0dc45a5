import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from contsense.correlators import CorrelationModel, SpectrumModel, lorentzian_spectrum
from contsense.models import high_temperature, single_qubit_loss, spin_squeezer
from contsense.qfi import (
    ENV_PREFACTOR,
    IneligibleModelError,
    bound_loose,
    bound_tight,
    env_bracket,
    env_filter_peak,
    fidelity_env,
    fidelity_global,
    filter_env,
    qfi_env_exponential,
    qfi_env_from_correlator,
    qfi_finite_difference,
    qfi_from_spectrum,
    qfi_global_from_correlator,
    sensitivity,
)
from contsense.two_sided import evolve_embedded


def test_fidelities_at_zero_theta():
    assert fidelity_global(np.eye(3) / 3) == pytest.approx(1.0)
    assert fidelity_env(np.eye(4) / 4) == pytest.approx(1.0)
    psi = np.array([0.6, 0.8j])
    assert fidelity_env(np.outer(psi, psi.conj())) == pytest.approx(1.0)
    assert fidelity_global(np.diag([0.5, 0.3])) == pytest.approx(0.8)


@settings(max_examples=50, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2**31 - 1))
def test_env_fidelity_dominates_global(d, seed):
    rng = np.random.default_rng(seed)
    mu = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    assert fidelity_env(mu) >= fidelity_global(mu) - 1e-12


def test_zero_time():
    est = qfi_finite_difference(high_temperature(2, 1.0), 0.0)
    assert abs(est.value) <= est.error_estimate
    corr = CorrelationModel.exponential(1.0, 1.0)
    assert qfi_global_from_correlator(corr, 0.0).value == 0.0
    assert qfi_env_from_correlator(corr, 0.0, eligible=True).value == 0.0


def test_env_below_global_high_temperature():
    m = high_temperature(2, 1.89 / 2)
    ie = qfi_finite_difference(m, 1.0, "environmental")
    ig = qfi_finite_difference(m, 1.0, "global")
    assert ie.value <= ig.value + ie.error_estimate + ig.error_estimate
    assert ie.converged and ig.converged


def test_step_halving_stable():
    m = spin_squeezer(4, 1.0, 1.0)
    a = qfi_finite_difference(m, 1.0)
    b = qfi_finite_difference(m, 1.0, h=a.theta_step / 2)
    assert abs(a.value - b.value) <= max(a.error_estimate, b.error_estimate)


def test_direct_route_agrees():
    m = high_temperature(3, 0.8)
    a = qfi_finite_difference(m, 1.0, route="embedded")
    b = qfi_finite_difference(m, 1.0, route="direct")
    assert a.value == pytest.approx(b.value, rel=1e-6)


def test_brute_force_matches_closed_form():
    n, gamma, T = 2, 1.89 / 2, 1.0
    brute = qfi_finite_difference(high_temperature(n, gamma), T).value
    closed = qfi_env_exponential(2 * 1.0 / 3 / 1, 2 * gamma, T)  # variance J(J+1)/3 = 2/3
    assert brute == pytest.approx(closed, rel=5e-3)


def test_ineligible_refused():
    with pytest.raises(IneligibleModelError):
        qfi_env_from_correlator(CorrelationModel.exponential(1.0, 1.0), 1.0)


def test_exponential_global_closed_form():
    v, g, T = 0.7, 1.3, 2.0
    corr = CorrelationModel.exponential(2 * v, g)
    ref = 8 * v * (T / g - (1 - math.exp(-g * T)) / g**2)
    assert qfi_global_from_correlator(corr, T).value == pytest.approx(ref, rel=1e-12)
    t = np.linspace(0, T, 20001)
    sampled = CorrelationModel.sampled(t, 2 * v * np.exp(-g * t))
    assert qfi_global_from_correlator(sampled, T).value == pytest.approx(ref, rel=1e-8)


def test_global_long_time_slope():
    corr = CorrelationModel.exponential(1.4, 0.9)
    a = qfi_global_from_correlator(corr, 100.0).value
    b = qfi_global_from_correlator(corr, 101.0).value
    assert b - a == pytest.approx(sensitivity(corr), rel=1e-10)


def test_env_limits():
    # small rate: I_E vanishes linearly in gamma (g(x) ~ 2x/3), checked against brute force
    T = 1.0
    small = [qfi_env_exponential(1.0, g, T) for g in (1e-3, 2e-3)]
    assert small[1] / small[0] == pytest.approx(2.0, rel=1e-2)
    brute = [qfi_finite_difference(high_temperature(2, g / 2), T).value for g in (1e-3, 2e-3)]
    assert brute[1] / brute[0] == pytest.approx(2.0, rel=1e-2)
    large = [qfi_env_exponential(1.0, g, T) for g in (1e3, 2e3)]
    assert large[1] / large[0] == pytest.approx(0.5, rel=1e-2)
    assert env_bracket(1e-3 * (1 - 1e-12)) == pytest.approx(env_bracket(1e-3), rel=1e-9)


@pytest.mark.parametrize("c0, g, T", [(1.0, 1.0, 1.0), (0.3, 5.0, 0.7), (2.0, 0.2, 3.0)])
def test_spectrum_matches_time_domain(c0, g, T):
    corr = CorrelationModel.exponential(c0, g)
    spec = lorentzian_spectrum(corr)
    assert qfi_from_spectrum(spec, T, "global").value == pytest.approx(
        qfi_global_from_correlator(corr, T).value, rel=1e-4)
    assert qfi_from_spectrum(spec, T, "environmental").value == pytest.approx(
        qfi_env_from_correlator(corr, T, eligible=True).value, rel=1e-4)


def test_zero_spectrum():
    assert qfi_from_spectrum(SpectrumModel("lorentzian", c0=0.0, gamma=1.0), 1.0).value == 0.0
    assert sensitivity(CorrelationModel.exponential(0.0, 1.0)) == 0.0


def test_narrow_spectrum_probes_filter_peak():
    # a narrow line pair at +-w_c picks out f_E(w_c)
    T = 1.0
    wc, _ = env_filter_peak()
    w = np.linspace(0, 2 * wc, 20001)
    width = 2e-2
    vals = np.exp(-0.5 * ((w - wc) / width) ** 2)
    area = 2 * trapezoid(vals, w) / (2 * np.pi)
    spec = SpectrumModel("sampled", omegas=w, values=vals)
    got = qfi_from_spectrum(spec, T, "environmental").value
    assert got == pytest.approx(16 * area * float(filter_env(wc, T)), rel=1e-3)


def test_bounds():
    assert bound_loose(2, 1.0) == 4
    assert bound_loose(10, 2.0) == 400
    assert bound_tight(1, 1.0) == pytest.approx(0.2625, abs=1e-3)
    assert bound_tight(3, 2.0) == pytest.approx(4 * bound_tight(3, 1.0))
    wc, peak = env_filter_peak()
    assert wc == pytest.approx(2.332, abs=1e-2)
    assert peak == pytest.approx(0.525, abs=1e-3)


def test_sensitivity_high_temperature():
    j = 1.5
    corr = CorrelationModel.exponential(2 * j * (j + 1) / 3, 2 * 0.4)
    assert sensitivity(corr) == pytest.approx(8 * j * (j + 1) / (3 * 2 * 0.4))


def test_prefactor_constant():
    assert ENV_PREFACTOR == 4.0


def test_single_qubit_finite_difference_value():
    est = qfi_finite_difference(single_qubit_loss(1.0), 1.0)
    assert est.value == pytest.approx(0.2327, abs=1e-3)
    assert est.value >= -est.error_estimate


def test_global_nondecreasing_in_T():
    m = spin_squeezer(2, 1.0, 1.0)
    vals = [qfi_finite_difference(m, T, "global").value for T in (0.25, 0.5, 1.0, 2.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_sensitivity_sampled_correlator():
    t = np.linspace(0, 40, 40001)
    corr = CorrelationModel.sampled(t, 1.2 * np.exp(-0.8 * t))
    assert sensitivity(corr) == pytest.approx(4 * 1.2 / 0.8, rel=1e-6)
    short = CorrelationModel.sampled(t[:101], 1.2 * np.exp(-0.8 * t[:101]))
    with pytest.raises(ValueError):
        sensitivity(short)
