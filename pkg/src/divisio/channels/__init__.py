"""
Quantum channels in the Choi representation.

A [Channel][divisio.channels.Channel] stores ``ϱ = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)``
over input ⊗ output. Composition, application, CPTP checks and inversion all
act on that one object, and the model constructors build the channel
families used in the divisibility studies.
"""

from divisio.channels.channel import (
    Channel,
    CptpReport,
    CptpVerdict,
    IncompleteKraus,
    KrausSet,
    NonInvertible,
    apply,
    channel_from_tensor,
    channel_from_transfer,
    choi_from_kraus,
    choi_from_rho,
    compose,
    is_cptp,
    rho_from_choi,
    transfer_matrix,
    try_invert,
)
from divisio.channels.io import ChoiFileModel, ChoiFormatError, read_choi, write_choi
from divisio.channels.models import (
    InvalidDistribution,
    OutOfRange,
    collisional_pair,
    dephasing_hd,
    dephasing_probability,
    dephasing_t,
    haar_unitary,
    identity_channel,
    pauli_channel,
    random_channel,
    replacer_channel,
    unitary_channel,
    unitary_mixture,
)

__all__ = [
    "Channel",
    "ChoiFileModel",
    "ChoiFormatError",
    "CptpReport",
    "CptpVerdict",
    "IncompleteKraus",
    "InvalidDistribution",
    "KrausSet",
    "NonInvertible",
    "OutOfRange",
    "apply",
    "channel_from_tensor",
    "channel_from_transfer",
    "choi_from_kraus",
    "choi_from_rho",
    "collisional_pair",
    "compose",
    "dephasing_hd",
    "dephasing_probability",
    "dephasing_t",
    "haar_unitary",
    "identity_channel",
    "is_cptp",
    "pauli_channel",
    "random_channel",
    "read_choi",
    "replacer_channel",
    "rho_from_choi",
    "transfer_matrix",
    "try_invert",
    "unitary_channel",
    "unitary_mixture",
    "write_choi",
]
