"""Continuous sensing with collective spin ensembles.

Quantum Fisher information of the field emitted by a dissipative sensor,
from brute-force two-sided evolution, from correlators and from noise
spectra, plus model factories, optimizers and an absorber construction.
"""
from .spin import SpinBasis, build_basis, collective_operator, moment
from .liouvillian import (
    IntegrationError,
    JumpTerm,
    NonUniqueSteadyState,
    SensorModel,
    propagate,
    steady_state,
)
from .models import (
    ModelFamily,
    dephasing_family,
    high_temperature,
    independent_array_qfi,
    independent_array_sensitivity,
    single_qubit_loss,
    single_qubit_loss_qfi,
    spin_squeezer,
)
from .two_sided import PseudoState, evolve_embedded, evolve_pseudo
from .correlators import (
    CorrelationModel,
    SpectrumModel,
    autocorrelator_analytic,
    autocorrelator_numeric,
    lorentzian_spectrum,
)
from .qfi import (
    IneligibleModelError,
    QfiEstimate,
    bound_loose,
    bound_tight,
    qfi_env_from_correlator,
    qfi_finite_difference,
    qfi_from_spectrum,
    qfi_global_from_correlator,
    sensitivity,
)
from .optimize import SweepRow, optimize_gamma, scaling_sweep
from .structures import (
    CascadedModel,
    build_absorber,
    classical_fisher_binary,
    no_click_probability,
)

__version__ = "0.1.0"
