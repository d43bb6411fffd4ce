"""Phase-insensitive bosonic Gaussian channels: capacities, Fock-basis
kernels, entropies and strong-converse success-probability bounds."""

from .channels import (
    ChannelParams,
    LossAmpDecomposition,
    capacity,
    decompose,
    make_additive,
    make_amplifier,
    make_loss,
    make_thermal,
    output_photon_numbers,
    weak_converse_rate_bound,
)
from .converse import (
    BoundInputs,
    BoundReport,
    SlackParams,
    SweepRow,
    chernoff_tail,
    concentration_tail,
    corollary_bound,
    decay_model,
    delta0,
    optimize_bound,
    rank_bound_check,
    rate_sweep,
    theorem1_bound,
)
from .entropy import (
    K_factor,
    Spectrum,
    check_renyi_smoothing,
    g,
    h2,
    min_entropy,
    moe_scan,
    renyi,
    renyi_thermal,
    shannon,
    smooth_min_entropy,
    thermal_spectrum,
    v_factor,
)
from .errors import (
    CutoffTooSmallError,
    NumericBudgetError,
    TailTooLargeError,
    TruncationBudgetError,
)
from .fock import (
    PhotonDistribution,
    PhotonKernel,
    TruncatedOperator,
    amp_kernel,
    apply_channel_matrix,
    apply_kernel,
    channel_kernel,
    coherent_occupation_probability,
    completeness_defect,
    convolve,
    kraus_amp,
    kraus_loss,
    loss_kernel,
    projector_count,
    sample_output,
)

__version__ = "0.1.0"
