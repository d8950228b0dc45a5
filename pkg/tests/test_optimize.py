import math

import numpy as np
import pytest

from contsense.models import ModelFamily
from contsense.optimize import (
    OptimizationError,
    golden_section_max,
    maximize_dimensionless_g,
    optimize_gamma,
    scaling_sweep,
)
from contsense.qfi import env_bracket


def test_golden_section_simple():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, -1, 2, xtol=1e-10)
    assert x == pytest.approx(0.3, abs=1e-9)
    with pytest.raises(OptimizationError):
        golden_section_max(lambda x: x, 1.0, 1.0)


def test_dimensionless_optimum():
    x, g = maximize_dimensionless_g()
    assert x == pytest.approx(1.9, abs=0.05)
    assert g == pytest.approx(0.381, abs=1e-3)
    assert env_bracket(1e-6) < 1e-5 and env_bracket(1e6) < 1e-5
    grid = np.linspace(0.1, 20, 1000)
    assert g >= max(env_bracket(v) for v in grid) - 1e-12


@pytest.mark.parametrize("axis, mult", [("z", 2.0), ("x", 1.0)])
def test_high_temperature_optimum(axis, mult):
    x, _ = maximize_dimensionless_g()
    row = optimize_gamma(ModelFamily("high_temperature", 4, axis), 1.0)
    assert mult * row.gamma_opt * 1.0 == pytest.approx(x, abs=1e-3)


def test_brute_route_n2():
    fam = ModelFamily("high_temperature", 2, "z")
    a = optimize_gamma(fam, 1.0, "analytic")
    b = optimize_gamma(fam, 1.0, "brute", n_scan=17)
    assert b.gamma_opt == pytest.approx(a.gamma_opt, rel=0.02)
    assert b.qfi_opt == pytest.approx(a.qfi_opt, rel=1e-3)


def test_golden_matches_grid_scan():
    fam = ModelFamily("dephasing_family", 3, "x", {"eta": 0.4})
    row = optimize_gamma(fam, 2.0, "analytic")
    from contsense.optimize import qfi_env_at
    grid = np.geomspace(0.01 / 2, 50 / 2, 1000)
    best = max(qfi_env_at(fam, g, 2.0, "analytic").value for g in grid)
    assert row.qfi_opt >= best * (1 - 1e-6)


def test_eta_independence():
    vals = [optimize_gamma(ModelFamily("dephasing_family", 4, "x", {"eta": e}), 1.0).qfi_opt
            for e in (-0.6, 0.0, 0.5)]
    assert np.allclose(vals, vals[0], rtol=1e-10)


def test_normalization_invariance():
    # rescaling L -> c L with Gamma -> Gamma / c^2 leaves the optimum unchanged
    from contsense.qfi import qfi_finite_difference
    from contsense.models import high_temperature
    from contsense.liouvillian import JumpTerm
    from dataclasses import replace
    m = high_temperature(2, 0.9)
    c = 1.7
    scaled = replace(m, jumps=tuple(JumpTerm(c * jt.operator, jt.rate / c**2) for jt in m.jumps))
    assert qfi_finite_difference(scaled, 1.0).value == pytest.approx(
        qfi_finite_difference(m, 1.0).value, rel=1e-8)


def test_scaling_sweep_analytic():
    rows, summary = scaling_sweep(lambda n: ModelFamily("high_temperature", n, "z"),
                                  [64, 128, 256, 512, 1024], 1.0)
    assert 1.95 <= summary["exponent"] <= 2.0
    x, g = maximize_dimensionless_g()
    assert summary["casimir_coefficient"] == pytest.approx(4 * g / 3, rel=1e-10)


def test_multimodal_rejected():
    from contsense.optimize import _check_unimodal
    with pytest.raises(OptimizationError):
        _check_unimodal(np.array([0.0, 1.0, 0.5, 2.0, 0.1]))


def test_squeezer_to_thermal_ratio():
    T = 1.0
    sq = optimize_gamma(ModelFamily("spin_squeezer", 1024, "x", {"r": math.log(8 * 1024)}), T)
    ht = optimize_gamma(ModelFamily("high_temperature", 1024, "z"), T)
    assert sq.qfi_opt / ht.qfi_opt == pytest.approx(1.5, rel=1e-12)
