import math

import numpy as np
import pytest

from contsense.models import high_temperature, spin_squeezer
from contsense.qfi import qfi_finite_difference
from contsense.structures import (
    NotDarkError,
    build_absorber,
    classical_fisher_binary,
    exchange_hamiltonian,
    no_click_probability,
    partial_trace_b,
)


def test_absorber_n1():
    ab = build_absorber(1)
    assert ab.h_csc.shape == (4, 4)
    assert max(ab.residuals().values()) <= 1e-12
    assert np.linalg.norm(ab.dark_state) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n", [4, 17, 32])
def test_absorber_partial_trace(n):
    ab = build_absorber(n)
    d = ab.basis.dim
    assert np.abs(partial_trace_b(ab.dark_state, d) - np.eye(d) / d).max() <= 1e-12
    assert max(ab.residuals().values()) <= 1e-12


def test_exchange_form_not_dark_beyond_one_qubit():
    assert np.linalg.norm(exchange_hamiltonian(build_absorber(1).basis) @ build_absorber(1).dark_state) <= 1e-12
    ab = build_absorber(2)
    assert np.linalg.norm(exchange_hamiltonian(ab.basis) @ ab.dark_state) > 0.1


def test_absorber_photodetection_saturates_sensor_qfi():
    cm = build_absorber(2).as_sensor_model(0.8)
    i_cl = classical_fisher_binary(cm, 1.0)
    i_e = qfi_finite_difference(high_temperature(2, 0.8), 1.0).value
    assert i_cl == pytest.approx(i_e, rel=1e-6)


def test_no_click_at_zero_theta():
    m = spin_squeezer(2, 1.0, 1.0)
    assert no_click_probability(m, 0.0, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-12)


def test_no_click_quadratic_and_even():
    m = spin_squeezer(2, 1.0, 1.0)
    T = 1.0
    th = 1e-2 / T
    p_plus = no_click_probability(m, th, T)
    p_minus = no_click_probability(m, -th, T)
    c2 = (p_plus - 1) / th**2
    assert c2 < 0
    assert abs(p_plus - p_minus) <= 1e-9
    assert 0 <= p_plus <= 1


def test_no_click_nonincreasing_in_T():
    m = spin_squeezer(4, 1.0, 1.5)
    vals = [no_click_probability(m, 0.05, T) for T in (0.5, 1.0, 2.0, 4.0)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_refuses_mixed_steady_state():
    with pytest.raises(NotDarkError):
        no_click_probability(high_temperature(2, 1.0), 0.1, 1.0)
    with pytest.raises(NotDarkError):
        classical_fisher_binary(spin_squeezer(3, 1.0, 1.0), 1.0)


def test_classical_fisher_zero_time():
    assert classical_fisher_binary(spin_squeezer(2, 1.0, 1.0), 0.0) == 0.0


@pytest.mark.parametrize("n, gamma, r", [(2, 1.0, 2.0), (4, 1.893 / 2, math.log(32))])
def test_photodetection_optimal(n, gamma, r):
    m = spin_squeezer(n, gamma, r)
    i_cl = classical_fisher_binary(m, 1.0)
    i_e = qfi_finite_difference(m, 1.0).value
    assert i_cl == pytest.approx(i_e, rel=5e-3)
