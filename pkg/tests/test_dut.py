"""Memory-subsystem model tests: transaction decode, power modes, latency,
fault injection, counters, and the three seeded bug mutations."""

import pytest

from reqflow.configspec import parse_config
from reqflow.dut import (
    MemoryModel,
    ModelError,
    Transaction,
    exec_transaction,
    inject_fault,
    set_power_mode,
)


def make_model(ecc="secded", tech="sram_hd", addr_words=64,
               lp_modes="retention, shutdown", bursts="single, incr4, incr8",
               mutations=None, data_width=8):
    lines = [
        "ip_name = mem0",
        f"data_width = {data_width}",
        f"addr_words = {addr_words}",
        f"ecc = {ecc}",
        f"tech = {tech}",
    ]
    if lp_modes:
        lines.append(f"lp_modes = {lp_modes}")
    lines.append(f"ahb_bursts = {bursts}")
    if mutations:
        lines.append("[debug]")
        lines.append(f"bug_mutations = {mutations}")
    return MemoryModel(parse_config("\n".join(lines) + "\n"))


def write(model, addr, data, burst="single"):
    return exec_transaction(model, Transaction(op="write", addr=addr,
                                               data=data, burst=burst))


def read(model, addr, burst="single"):
    return exec_transaction(model, Transaction(op="read", addr=addr,
                                               burst=burst))


def test_write_read_roundtrip_all_values():
    model = make_model()
    for d in range(256):
        assert write(model, d % 64, d).status == "okay"
        resp = read(model, d % 64)
        assert resp.status == "okay"
        assert resp.data == (d,)
        assert resp.ecc_flags == ("ok",)


def test_idle_is_a_zero_beat_okay():
    model = make_model()
    resp = exec_transaction(model, Transaction(op="idle"))
    assert resp == type(resp)(status="okay")
    assert resp.data == ()
    assert resp.latency == 0


def test_burst_write_replicates_and_reads_back():
    model = make_model()
    assert write(model, 8, 0x3C, burst="incr8").status == "okay"
    resp = read(model, 8, burst="incr8")
    assert resp.data == (0x3C,) * 8
    assert resp.ecc_flags == ("ok",) * 8


def test_burst_reads_follow_increasing_addresses():
    model = make_model()
    for offset, value in enumerate([11, 22, 33, 44]):
        write(model, 20 + offset, value)
    assert read(model, 20, burst="incr4").data == (11, 22, 33, 44)


@pytest.mark.parametrize("addr,burst", [
    (64, "single"),
    (-1, "single"),
    (62, "incr4"),   # beat 3 lands at 65
    (63, "incr4"),
    (57, "incr8"),
])
def test_out_of_range_errors_and_preserves_state(addr, burst):
    model = make_model()
    write(model, 0, 0xAA)
    snapshot = list(model.array)
    before = (model.counters.reads, model.counters.writes)
    resp = exec_transaction(model, Transaction(op="write", addr=addr,
                                               data=1, burst=burst))
    assert resp.status == "error"
    assert resp.data == ()
    assert model.array == snapshot
    assert (model.counters.reads, model.counters.writes) == before
    assert read(model, addr, burst=burst).status == "error"


def test_unconfigured_burst_is_a_bus_error():
    model = make_model(bursts="single")
    assert read(model, 0, burst="incr4").status == "error"
    assert write(model, 0, 1, burst="incr8").status == "error"


def test_malformed_transactions_raise():
    model = make_model()
    with pytest.raises(ModelError):
        exec_transaction(model, Transaction(op="refresh", addr=0))
    with pytest.raises(ModelError):
        exec_transaction(model, Transaction(op="read", addr=0, burst="wrap4"))
    with pytest.raises(ModelError):
        exec_transaction(model, Transaction(op="write", addr=0))
    with pytest.raises(ValueError):
        write(model, 0, 256)


@pytest.mark.parametrize("tech,read_lat,write_lat", [
    ("sram_hd", 2, 2),
    ("sram_hs", 1, 1),
    ("rram", 3, 5),
])
def test_latency_scales_with_beats(tech, read_lat, write_lat):
    model = make_model(tech=tech)
    assert write(model, 0, 1).latency == write_lat
    assert read(model, 0).latency == read_lat
    assert write(model, 0, 1, burst="incr4").latency == 4 * write_lat
    assert read(model, 0, burst="incr8").latency == 8 * read_lat


def test_retention_preserves_contents():
    model = make_model()
    write(model, 5, 0x5A)
    assert set_power_mode(model, "retention") is True
    assert read(model, 5).status == "error"
    assert write(model, 5, 0).status == "error"
    assert set_power_mode(model, "active") is True
    assert read(model, 5).data == (0x5A,)
    assert read(model, 5).ecc_flags == ("ok",)


def test_shutdown_invalidates_to_all_ones():
    model = make_model()  # secded k=8
    write(model, 5, 0x5A)
    set_power_mode(model, "shutdown")
    assert model.array[5] == (1 << model.scheme.n) - 1
    assert read(model, 5).status == "error"
    set_power_mode(model, "active")
    resp = read(model, 5)
    # frozen decode of the all-ones word for this construction
    assert resp.ecc_flags == ("corrected",)
    assert resp.data == (0x7F,)


def test_shutdown_invalidation_detected_at_k16():
    model = make_model(data_width=16)
    write(model, 5, 0x1234)
    set_power_mode(model, "shutdown")
    set_power_mode(model, "active")
    assert read(model, 5).ecc_flags == ("detected_uncorrectable",)


def test_unconfigured_power_mode_rejected():
    model = make_model(lp_modes="retention")
    write(model, 0, 7)
    assert set_power_mode(model, "shutdown") is False
    assert model.power_mode == "active"
    assert read(model, 0).data == (7,)
    with pytest.raises(ModelError):
        set_power_mode(model, "doze")


def test_power_transitions_are_recorded():
    model = make_model()
    set_power_mode(model, "retention")
    set_power_mode(model, "active")
    set_power_mode(model, "shutdown")
    assert model.power_transitions == [
        ("active", "retention"),
        ("retention", "active"),
        ("active", "shutdown"),
    ]


def test_inject_fault_zero_mask_is_a_noop():
    model = make_model()
    write(model, 3, 0x42)
    before = list(model.array)
    inject_fault(model, 3, 0)
    assert model.array == before


def test_single_fault_corrected_back():
    model = make_model()
    write(model, 3, 0x42)
    counters_before = (model.counters.reads, model.counters.corrected)
    inject_fault(model, 3, 1 << 9)
    assert (model.counters.reads, model.counters.corrected) == counters_before
    resp = read(model, 3)
    assert resp.data == (0x42,)
    assert resp.ecc_flags == ("corrected",)


def test_triple_fault_detected_by_dected():
    model = make_model(ecc="dected")
    write(model, 3, 0x42)
    inject_fault(model, 3, 0b111)
    resp = read(model, 3)
    assert resp.ecc_flags == ("detected_uncorrectable",)
    # and a double fault is corrected with exact data
    model2 = make_model(ecc="dected")
    write(model2, 3, 0x42)
    inject_fault(model2, 3, 0b101)
    assert read(model2, 3) == type(resp)(status="okay", data=(0x42,),
                                         ecc_flags=("corrected",), latency=2)


def test_inject_fault_validation():
    model = make_model()
    with pytest.raises(ModelError):
        inject_fault(model, 64, 1)
    with pytest.raises(ModelError):
        inject_fault(model, -1, 1)
    with pytest.raises(ModelError):
        inject_fault(model, 0, 1 << model.scheme.n)


def test_counter_conservation():
    model = make_model()
    okay_read_beats = 0
    okay_write_beats = 0
    script = [
        Transaction(op="write", addr=0, data=1),
        Transaction(op="write", addr=4, data=2, burst="incr4"),
        Transaction(op="read", addr=0),
        Transaction(op="read", addr=4, burst="incr4"),
        Transaction(op="read", addr=63, burst="incr8"),  # out of range
        Transaction(op="write", addr=70, data=3),        # out of range
        Transaction(op="idle"),
        Transaction(op="read", addr=0, burst="incr8"),
    ]
    for txn in script:
        resp = exec_transaction(model, txn)
        if resp.status == "okay" and txn.op == "read":
            okay_read_beats += len(resp.data)
        if resp.status == "okay" and txn.op == "write":
            okay_write_beats += {"single": 1, "incr4": 4, "incr8": 8}[txn.burst]
    assert model.counters.reads == okay_read_beats == 13
    assert model.counters.writes == okay_write_beats == 5
    assert model.counters.corrected == 0
    assert model.counters.detected == 0


def test_corrected_and_detected_counters():
    model = make_model()
    write(model, 0, 0x11)
    write(model, 1, 0x22)
    inject_fault(model, 0, 1)
    inject_fault(model, 1, 0b11)
    read(model, 0, burst="incr4")
    assert model.counters.corrected == 1
    assert model.counters.detected == 1


def test_syndrome_swap_miscorrects_single_bit_faults():
    clean = make_model()
    bugged = make_model(mutations="syndrome_swap")
    for m in (clean, bugged):
        write(m, 0, 0x55)
        inject_fault(m, 0, 1)  # single-bit error at the first data position
    assert read(clean, 0).data == (0x55,)
    resp = read(bugged, 0)
    assert resp.ecc_flags == ("corrected",)
    assert resp.data != (0x55,)  # miscorrection: the flag lies about the data


def test_syndrome_swap_needs_a_correcting_level():
    for ecc in ("none", "sed"):
        with pytest.raises(ModelError):
            make_model(ecc=ecc, mutations="syndrome_swap")


def test_retention_loss_corrupts_word_zero():
    bugged = make_model(ecc="none", mutations="retention_loss")
    write(bugged, 0, 0x10)
    write(bugged, 1, 0x20)
    set_power_mode(bugged, "retention")
    set_power_mode(bugged, "active")
    assert read(bugged, 0).data == (0x11,)  # bit 0 flipped on wake
    assert read(bugged, 1).data == (0x20,)

    shielded = make_model(ecc="secded", mutations="retention_loss")
    write(shielded, 0, 0x10)
    set_power_mode(shielded, "retention")
    set_power_mode(shielded, "active")
    resp = read(shielded, 0)
    assert resp.data == (0x10,)
    assert resp.ecc_flags == ("corrected",)  # visible as a flag discrepancy


def test_burst_wrap_wraps_at_eight_word_boundary():
    bugged = make_model(mutations="burst_wrap")
    for offset, value in enumerate([1, 2, 3, 4]):
        write(bugged, 6 + offset, value)
    resp = read(bugged, 6, burst="incr4")
    assert resp.data == (1, 2, 0, 0)  # beats wrapped to words 0 and 1
    # a top-of-memory burst that should error now wraps back in range
    assert read(bugged, 62, burst="incr4").status == "okay"
    clean = make_model()
    assert read(clean, 62, burst="incr4").status == "error"


def test_single_beat_unaffected_by_burst_wrap():
    bugged = make_model(mutations="burst_wrap")
    write(bugged, 9, 0x77)
    assert read(bugged, 9).data == (0x77,)


def test_mutations_default_off():
    model = make_model()
    assert model.mutations == frozenset()
