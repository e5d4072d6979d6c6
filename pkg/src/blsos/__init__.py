"""Exact sum-of-squares certificates for discrete Brascamp-Lieb inequalities."""

from .certificate import Certificate, deserialize, serialize, verify
from .datum import BLDatum, is_feasible, validate
from .prover import ProverError, prove

__version__ = "0.1.0"

__all__ = ["BLDatum", "Certificate", "ProverError", "deserialize", "is_feasible", "prove",
           "serialize", "validate", "verify"]
