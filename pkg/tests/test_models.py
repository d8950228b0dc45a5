import math

import numpy as np
import pytest

from contsense.liouvillian import assemble_superoperator, steady_state_residual
from contsense.models import (
    ModelFamily,
    dark_kernel,
    dephasing_family,
    high_temperature,
    independent_array_qfi,
    independent_array_sensitivity,
    single_qubit_loss,
    single_qubit_loss_qfi,
    single_qubit_loss_sensitivity,
    spin_squeezer,
)
from contsense.qfi import qfi_finite_difference
from contsense.spin import build_basis, collective_operator, moment


def test_high_temperature_n1_jumps():
    m = high_temperature(1, 2.0)
    ops = [jt.operator for jt in m.jumps]
    assert np.allclose(ops[0], [[0, 0], [1, 0]])
    assert np.allclose(ops[1], [[0, 1], [0, 0]])
    assert all(jt.rate == 2.0 for jt in m.jumps)


@pytest.mark.parametrize("n", [2, 5, 8])
def test_high_temperature_variance(n):
    m = high_temperature(n, 1.0)
    _, var = moment(m.generator, m.rho_ss)
    assert var == pytest.approx(build_basis(n).casimir / 3, rel=1e-12)


def test_dephasing_family_eta0_equals_high_temperature():
    a = assemble_superoperator(dephasing_family(3, 0.9, 0.0))
    b = assemble_superoperator(high_temperature(3, 0.9))
    assert np.abs(a - b).max() <= 1e-12


def test_eta_range():
    with pytest.raises(ValueError):
        dephasing_family(2, 1.0, 1.0)
    with pytest.raises(ValueError):
        ModelFamily("dephasing_family", 2, "x", {"eta": -1.5})


def test_squeezer_even_dark_state():
    m = spin_squeezer(2, 1.0, 1.0)
    assert np.linalg.norm(m.jumps[0].operator @ m.dark_state) <= 1e-12
    assert np.trace(m.rho_ss @ m.rho_ss).real == pytest.approx(1.0, abs=1e-10)
    assert m.env_eligible


@pytest.mark.parametrize("n", [3, 5, 9])
def test_squeezer_odd_steady_state(n):
    m = spin_squeezer(n, 1.0, 1.0)
    assert steady_state_residual(m, m.rho_ss) <= 1e-10
    assert np.trace(m.rho_ss @ m.rho_ss).real < 1 - 1e-6
    assert not m.env_eligible


@pytest.mark.parametrize("n", [2, 4, 8])
def test_squeezer_variance_approaches_half_casimir(n):
    cas = build_basis(n).casimir
    vals = [moment(collective_operator(build_basis(n), "x"), spin_squeezer(n, 1.0, r).rho_ss)[1]
            for r in (1.0, 3.0, 6.0)]
    gaps = [abs(v - cas / 2) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3 * cas


def test_factory_residuals():
    for m in (high_temperature(4, 1.3), dephasing_family(4, 0.7, 0.4, "x"),
              spin_squeezer(4, 2.0, 1.5), spin_squeezer(5, 2.0, 1.5), single_qubit_loss(0.9)):
        assert steady_state_residual(m, m.rho_ss) <= 1e-10 * m.rate_max


def test_dark_kernel_rejects_degenerate():
    with pytest.raises(ValueError):
        dark_kernel(np.zeros((3, 3)))


def test_single_qubit_closed_form_values():
    assert single_qubit_loss_qfi(1.0, 1.0) == pytest.approx(0.2327, abs=1e-3)
    # small T: leading order (Gamma T)^3 / (3 Gamma^2)
    assert single_qubit_loss_qfi(1.0, 1e-3) == pytest.approx(1e-9 / 3, rel=1e-3)
    # series and exponential branches join smoothly
    x = 1e-2
    assert single_qubit_loss_qfi(1.0, x * (1 - 1e-12)) == pytest.approx(single_qubit_loss_qfi(1.0, x), rel=1e-8)
    slope = single_qubit_loss_qfi(2.0, 101.0) - single_qubit_loss_qfi(2.0, 100.0)
    assert slope == pytest.approx(single_qubit_loss_sensitivity(2.0), rel=1e-10)


def test_single_qubit_brute_force_reference():
    est = qfi_finite_difference(single_qubit_loss(1.0), 1.0)
    assert est.value == pytest.approx(0.2327, abs=1e-3)


def test_independent_array():
    assert independent_array_qfi(1, 1.3, 2.0) == pytest.approx(single_qubit_loss_qfi(1.3, 2.0))
    for n in (1, 3, 10):
        assert independent_array_sensitivity(n, 2.0) == pytest.approx(4 * n**2 / 2.0, rel=1e-14)


def test_independent_array_large_n_limit():
    # I_E -> Gamma T^3 / 3 as N grows, with an O(1/N) deficit
    vals = [independent_array_qfi(n, 1.0, 1.0) for n in (10, 100, 1000)]
    assert vals[0] < vals[1] < vals[2] < 1 / 3
    assert vals[2] == pytest.approx(1 / 3, rel=1e-3)


def test_family_build_and_rate_multiplier():
    fam = ModelFamily("spin_squeezer", 4, "x", {"r": math.log(32)})
    assert fam.rate_multiplier() == 2.0
    assert fam.build(1.0).dark_state is not None
    assert ModelFamily("high_temperature", 3, "x").rate_multiplier() == 1.0
    with pytest.raises(ValueError):
        ModelFamily("boundary_time_crystal", 2)
