"""Transaction-level model of the configurable memory subsystem.

Decodes bus transactions (single and incrementing bursts), runs data through
the configured error-correction scheme, applies technology latency constants
and low-power modes, and supports fault injection. Deliberate bug mutations
can be compiled in through the configuration's debug section so the
surrounding flow has real defects to find.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from reqflow.configspec import AHB_BURSTS, IpConfiguration
from reqflow.dut.ecc import EccScheme, build_ecc, decode, encode

POWER_MODES = ("active", "retention", "shutdown")

# read/write latency in cycles per technology
TECH_LATENCY = {
    "sram_hd": (2, 2),
    "sram_hs": (1, 1),
    "rram": (3, 5),
}

BURST_BEATS = {"single": 1, "incr4": 4, "incr8": 8}

# shutdown invalidates every stored codeword to this pattern (all ones)
INVALIDATION_ALL_ONES = "all_ones"

# weight-1 corruption applied to word 0 by the retention_loss mutation
RETENTION_LOSS_MASK = 1

FLAG_OK = "ok"
FLAG_CORRECTED = "corrected"
FLAG_DETECTED = "detected_uncorrectable"


class ModelError(ValueError):
    """Programmatic misuse of the model (as opposed to a bus error response)."""


@dataclass(frozen=True)
class Transaction:
    """One bus transaction. Burst beats address consecutive words; a burst
    write stores the same data word at every beat address."""

    op: str  # read | write | idle
    addr: int = 0
    data: int | None = None
    burst: str = "single"


@dataclass(frozen=True)
class BusResponse:
    status: str  # okay | error
    data: tuple[int, ...] = ()
    ecc_flags: tuple[str, ...] = ()
    latency: int = 0


@dataclass
class Counters:
    reads: int = 0
    writes: int = 0
    corrected: int = 0
    detected: int = 0


_ERROR = BusResponse(status="error")


class MemoryModel:
    """A memory instance shaped by one IpConfiguration.

    The array holds addr_words codewords of scheme.n bits. All mutation of
    the array goes through exec_transaction, set_power_mode (shutdown
    invalidation) and inject_fault.
    """

    def __init__(self, config: IpConfiguration):
        self.config = config
        self.scheme: EccScheme = build_ecc(config.ecc, config.data_width)
        self.array: list[int] = [0] * config.addr_words
        self.power_mode = "active"
        self.read_latency, self.write_latency = TECH_LATENCY[config.tech]
        self.mutations = frozenset(config.bug_mutations)
        self.counters = Counters()
        self.power_transitions: list[tuple[str, str]] = []
        self._syndrome_table = self._build_decode_table()

    def _build_decode_table(self) -> dict[int, int] | None:
        if "syndrome_swap" not in self.mutations:
            return None
        if self.scheme.t_correct < 1:
            raise ModelError(
                "syndrome_swap requires a correcting ecc level (secded/dected)")
        table = dict(self.scheme.syndrome_table)
        s0 = self.scheme.columns[0]
        s1 = self.scheme.columns[1]
        table[s0], table[s1] = table[s1], table[s0]
        return table

    def decode_word(self, word: int) -> tuple[str, int]:
        return decode(self.scheme, word, self._syndrome_table)


def _beat_addresses(model: MemoryModel, txn: Transaction) -> list[int]:
    beats = BURST_BEATS[txn.burst]
    if "burst_wrap" in model.mutations and txn.burst != "single":
        # wrap at an 8-word boundary instead of incrementing across it
        base = txn.addr & ~7
        return [base | ((txn.addr + i) & 7) for i in range(beats)]
    return [txn.addr + i for i in range(beats)]


def exec_transaction(model: MemoryModel, txn: Transaction) -> BusResponse:
    """Execute one transaction and return the bus response.

    Bus-level faults (unconfigured burst, out-of-range beat, access in a
    low-power mode) produce an error response and leave all state untouched.
    Malformed transactions (unknown op or burst, missing or oversized write
    data) raise ModelError.
    """
    if txn.op == "idle":
        return BusResponse(status="okay")
    if txn.op not in ("read", "write"):
        raise ModelError(f"unknown op {txn.op!r}")
    if txn.burst not in AHB_BURSTS:
        raise ModelError(f"unknown burst {txn.burst!r}")
    if txn.burst not in model.config.ahb_bursts:
        return _ERROR
    if model.power_mode != "active":
        return _ERROR
    addrs = _beat_addresses(model, txn)
    if any(a < 0 or a >= model.config.addr_words for a in addrs):
        return _ERROR

    if txn.op == "write":
        if txn.data is None:
            raise ModelError("write transaction carries no data")
        word = encode(model.scheme, txn.data)  # validates the data width
        for a in addrs:
            model.array[a] = word
        model.counters.writes += len(addrs)
        return BusResponse(status="okay", latency=len(addrs) * model.write_latency)

    data = []
    flags = []
    for a in addrs:
        status, value = model.decode_word(model.array[a])
        data.append(value)
        flags.append(status)
        if status == FLAG_CORRECTED:
            model.counters.corrected += 1
        elif status == FLAG_DETECTED:
            model.counters.detected += 1
    model.counters.reads += len(addrs)
    return BusResponse(status="okay", data=tuple(data), ecc_flags=tuple(flags),
                       latency=len(addrs) * model.read_latency)


def set_power_mode(model: MemoryModel, mode: str) -> bool:
    """Request a power-mode transition; returns False if the mode is not
    configured (state unchanged). Entering shutdown invalidates every stored
    codeword to all ones; leaving retention preserves contents."""
    if mode not in POWER_MODES:
        raise ModelError(f"unknown power mode {mode!r}")
    if mode != "active" and mode not in model.config.lp_modes:
        return False
    previous = model.power_mode
    if previous == "retention" and mode != "retention":
        if "retention_loss" in model.mutations:
            model.array[0] ^= RETENTION_LOSS_MASK
    if mode == "shutdown" and previous != "shutdown":
        all_ones = (1 << model.scheme.n) - 1
        for a in range(model.config.addr_words):
            model.array[a] = all_ones
    model.power_mode = mode
    model.power_transitions.append((previous, mode))
    return True


def inject_fault(model: MemoryModel, addr: int, flip_mask: int) -> None:
    """XOR a stored codeword with flip_mask. Counters are untouched."""
    if addr < 0 or addr >= model.config.addr_words:
        raise ModelError(f"fault address out of range: {addr}")
    if flip_mask < 0 or flip_mask >> model.scheme.n:
        raise ModelError(f"flip mask does not fit {model.scheme.n} bits")
    model.array[addr] ^= flip_mask
