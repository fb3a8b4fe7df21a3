"""Continuous-variable distributed quadrature-sensing toolkit."""

__version__ = "0.1.0"

from .gaussian import (  # noqa: F401
    GaussianState,
    LossChannel,
    SymplecticTransform,
    apply_loss,
    apply_symplectic,
    balanced_splitter,
    coherent_state,
    displace_all,
    homodyne_sample,
    homodyne_samples,
    squeezed_vacuum,
    tensor,
    unbalanced_splitter,
    vacuum_state,
)
from .protocols import (  # noqa: F401
    EstimatorReport,
    SensorNetworkConfig,
    build_entangled_input,
    build_product_input,
    entangled_rms_error,
    phase_rms_error,
    product_rms_error,
    scaling_exponent,
    sensitivity_ratio_db,
    simulate_displacement_protocol,
    simulate_phase_protocol,
)
from .allocation import (  # noqa: F401
    AllocationResult,
    WeightedNetwork,
    allocate_photons_product,
    optimal_weights_entangled,
    optimal_weights_product,
    weighted_entangled_rms,
)
from .fisher import (  # noqa: F401
    SqueezedThermalParams,
    cr_bound_separable,
    fisher_closed_form,
    fisher_max,
    fisher_numeric,
    gaussian_fidelity,
)
from .fock import FockOperator, fock_fidelity, gaussian_to_fock  # noqa: F401
