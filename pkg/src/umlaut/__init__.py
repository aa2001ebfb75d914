"""Quantum umlaut information for states, channels and Gaussian states."""

from .channel import (
    Channel,
    ChannelUmlautResult,
    bs_channel_umlaut,
    channel_finiteness_check,
    channel_lautum,
    channel_umlaut,
    channel_umlaut_covariant,
    chernoff_lower_bound,
    choi_from_kraus,
    cq_channel,
    cq_channel_umlaut,
    cq_dual_umlaut,
    cq_umlaut_at,
    ell_convergence_bound,
    gad_channel,
    identity_channel,
    lower_umlaut_ell,
    output_state,
    replacer_channel,
    restricted_umlaut,
    tensor_channels,
    two_copy_lower_bound,
)
from .coding import (
    audenaert_gap,
    ns_error_probability,
    nussbaum_szkola,
    sanov_finite_n_estimate,
    zero_rate_unassisted_exponent_cq,
)
from .divergence import (
    bs_relative_entropy,
    hypothesis_testing_divergence,
    petz_renyi,
    relative_entropy,
)
from .errors import ConvergenceError, DocumentError, InvariantError, SizeGuardError, UmlautError
from .estimators import ChannelUmlaut, StateUmlaut
from .gaussian import (
    GaussianState,
    covariance_from_hamiltonian,
    gaussian_marginal,
    gaussian_umlaut_marginal,
    hamiltonian_from_covariance,
    symplectic_form,
)
from .optim import OptimizerOptions
from .state import (
    BipartiteState,
    UmlautResult,
    bs_lautum,
    bs_umlaut_state,
    lautum,
    petz_umlaut,
    umlaut_information,
    umlaut_information_direct,
    umlaut_marginal,
)

__version__ = "0.1.0"
