"""Link-level simulator for RSMA downlinks with data-dependent interleaving
of the common stream."""

from secure_rsma.bitframe import (
    BitFramePlan,
    FrameBits,
    PlanError,
    attack_search_space,
    rho,
    sequence_count,
    validate_plan,
)
from secure_rsma.interleaver import (
    InterleavingPattern,
    apply,
    census_patterns,
    flip_distance,
    generate_pattern,
    invert,
)
from secure_rsma.modem import QPSK, ModulationSpec, demodulate, modulate

__all__ = [
    "BitFramePlan",
    "FrameBits",
    "PlanError",
    "attack_search_space",
    "rho",
    "sequence_count",
    "validate_plan",
    "InterleavingPattern",
    "apply",
    "census_patterns",
    "flip_distance",
    "generate_pattern",
    "invert",
    "QPSK",
    "ModulationSpec",
    "demodulate",
    "modulate",
]

__version__ = "0.1.0"
