import numpy as np
import pytest

from contsense.models import dephasing_family, high_temperature, single_qubit_loss, spin_squeezer
from contsense.qfi import fidelity_global
from contsense.two_sided import evolve_embedded, evolve_pseudo, zero_mean_generator

SHIPPED = [
    lambda: high_temperature(2, 1.0),
    lambda: high_temperature(5, 0.6, "x"),
    lambda: dephasing_family(4, 0.8, 0.3, "y"),
    lambda: spin_squeezer(4, 0.9, 1.2),
    lambda: spin_squeezer(3, 0.9, 1.2),
    lambda: single_qubit_loss(1.0),
]


@pytest.mark.parametrize("make", SHIPPED)
def test_stationary_at_zero_theta(make):
    m = make()
    mu = evolve_embedded(m, 0.0, 1.3)
    assert np.abs(mu.entries - m.rho_ss).max() <= 1e-10
    assert mu.trace == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("make", SHIPPED)
@pytest.mark.parametrize("theta, T", [(1e-2, 1.0), (-3e-3, 2.0), (5e-3, 0.5)])
def test_embedding_matches_direct(make, theta, T):
    m = make()
    tol = 1e-12
    a = evolve_embedded(m, theta, T, tol).entries
    b = evolve_pseudo(m, theta, T, tol).entries
    assert np.abs(a - b).max() <= 10 * tol


def test_zero_mean_shift():
    m = spin_squeezer(5, 1.0, 0.7, axis="z")
    z = zero_mean_generator(m, m.rho_ss)
    assert abs(np.trace(z @ m.rho_ss)) <= 1e-12 * 5


def test_single_qubit_dephasing():
    assert abs(evolve_embedded(single_qubit_loss(1.0), 0.05, 1.0).trace) < 1


def test_trace_decreasing_in_T():
    m = high_temperature(2, 1.0)
    vals = [fidelity_global(evolve_embedded(m, 0.05, T)) for T in (0.5, 1.0, 2.0, 4.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_trace_even_in_theta():
    # odd part of Tr mu shrinks at least like theta^3 under halving
    m = spin_squeezer(4, 1.0, 1.0)
    T = 1.0

    def odd(theta):
        return abs(evolve_pseudo(m, theta, T, 1e-13).trace - evolve_pseudo(m, -theta, T, 1e-13).trace)

    a, b = odd(0.2), odd(0.1)
    assert b <= 1e-12 or np.log2(a / b) >= 3 - 0.1
