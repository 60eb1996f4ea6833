"""Return-time sets: finite-horizon integer sets, their densities and families,
block-family certificates, and exact weighted backward shifts."""

from .natset import NatSet, SetSpec, boolean, cusp_transform, gap_list, materialize, translate
from .density import DensityEstimates, DensityProfile, density_estimates, profile
from .families import (
    BlockWitness,
    BoundedStepAP,
    ClassifyParams,
    DensityWitness,
    PiecewiseSyndetic,
    Syndetic,
    Thick,
    certificate_from_json,
    classify,
    longest_bounded_step_ap,
    recheck,
    syndetic_core_extraction,
)
from .blockfam import block_certificate_check, compose_block_witness
from .shiftlab import (
    ShiftSpace,
    SparseVector,
    Weights,
    build_pf_vector,
    condition_a_check,
    condition_b_check,
    return_time_set,
    shift_apply,
)
