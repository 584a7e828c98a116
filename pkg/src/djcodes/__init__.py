"""Detected-jump channel: capacities, the simulated erasure+flip channel, and jump codes."""

from .capacity import (
    CapacityCurve,
    CoherentInfoResult,
    blahut_arimoto,
    capacity_bitflip_example,
    classical_capacity_xi,
    coherent_info,
    dj_coherent_info_scalar,
    quantum_capacity_dj,
    quantum_capacity_general,
    sweep_curves,
)
from .channels import (
    ERASURE,
    DiscreteChannel,
    build_ad,
    build_dj,
    build_dj_primed,
    complementary,
    extract_xi,
    sample_xi_quantum,
    verify_degradable,
)
from .codes import (
    BinaryLinearCode,
    DecodeResult,
    compute_distance,
    decode_erasure_flip,
    encode,
    make_family,
    parse_code,
)
from .jumpcodes import (
    ErrorPattern,
    JumpCode,
    KLReport,
    build_recovery,
    entanglement_infidelity,
    error_operator,
    kraus_expansion_check,
    lift,
    order_t_error_set,
    verify_kl,
)
from .ldpc import bp_decode_xi, peel_decode, random_ldpc
from .quantum import (
    LabeledKrausChannel,
    apply_channel,
    apply_channel_labeled,
    partial_trace,
    shannon_entropy,
    tensor,
    von_neumann_entropy,
)

__version__ = "0.1.0"
