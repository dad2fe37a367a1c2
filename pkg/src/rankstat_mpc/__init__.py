# This file makes Python treat the `rankstat_mpc` directory as a package.

__version__ = "0.1.0"

from .threshold_paillier import Ciphertext, PublicParams, SecretKeyShare, keygen
from .rank_core import SearchState, new_search, update_state

__all__ = [
    "Ciphertext",
    "PublicParams",
    "SearchState",
    "SecretKeyShare",
    "keygen",
    "new_search",
    "update_state",
]
