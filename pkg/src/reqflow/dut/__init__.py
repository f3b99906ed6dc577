"""Configurable memory-subsystem model and its error-correction schemes."""

from reqflow.dut.ecc import EccScheme, UnsupportedEccError, build_ecc, decode, encode
from reqflow.dut.model import (
    BusResponse,
    MemoryModel,
    ModelError,
    Transaction,
    exec_transaction,
    inject_fault,
    set_power_mode,
)

__all__ = [
    "BusResponse",
    "EccScheme",
    "MemoryModel",
    "ModelError",
    "Transaction",
    "UnsupportedEccError",
    "build_ecc",
    "decode",
    "encode",
    "exec_transaction",
    "inject_fault",
    "set_power_mode",
]
