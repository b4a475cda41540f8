"""Deterministic d-ary two-way quantum key distribution over mutually unbiased bases."""
from .galois import FieldSpec, factor_prime_power, field_of_order, make_field
from .mub import MubTable, build_mub, mub_vector, verify_mub
from .protocol import ProtocolConfig, RunRecord

__all__ = ["FieldSpec", "MubTable", "ProtocolConfig", "RunRecord", "build_mub",
           "factor_prime_power", "field_of_order", "make_field", "mub_vector", "verify_mub"]
__version__ = "0.1.0"
