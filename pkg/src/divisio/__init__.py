"""divisio: distance of two-step quantum dynamics from CP- and P-divisibility."""

from divisio.channels import Channel
from divisio.diamond import diamond_distance, diamond_norm
from divisio.divisibility import DivisibilityReport, cp_distance, p_distance_qubit

__all__ = [
    "Channel",
    "DivisibilityReport",
    "cp_distance",
    "diamond_distance",
    "diamond_norm",
    "p_distance_qubit",
]
