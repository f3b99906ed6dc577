"""Executable scenarios behind generated tests.

Each scenario drives a fresh MemoryModel built from the configuration,
emits named checks (folded to a per-run verdict) and coverage bin hits,
and writes detail lines for any failing check. Entities follow the
``chk.<test>.<name>`` and ``cov.<test>.<point>.<bin>`` naming that the
verification plan maps by pattern.
"""

from __future__ import annotations

import random
from itertools import combinations

from reqflow.configspec import IpConfiguration
from reqflow.dut.ecc import decode, encode
from reqflow.dut.model import (
    BURST_BEATS,
    FLAG_CORRECTED,
    FLAG_DETECTED,
    FLAG_OK,
    MemoryModel,
    Transaction,
    exec_transaction,
    inject_fault,
    set_power_mode,
)
from reqflow.regression.descriptors import TestDescriptor

MAX_LOG_LINES = 24

ECC_SAMPLE_COUNT = 64

FAULTS_PER_WEIGHT = 6
RANDOM_OP_COUNT = 40


class Collector:
    """Accumulates check outcomes, bin hits, and failure detail for one run."""

    def __init__(self, test: str):
        self.test = test
        self.checks: dict[str, bool] = {}
        self.hits: set[str] = set()
        self.log: list[str] = []

    def check(self, name: str, ok: bool, detail: str | None = None) -> None:
        entity = f"chk.{self.test}.{name}"
        self.checks[entity] = self.checks.get(entity, True) and ok
        if not ok and detail is not None and len(self.log) < MAX_LOG_LINES:
            self.log.append(f"{name}: {detail}")

    def hit(self, point: str, bin_name: str) -> None:
        self.hits.add(f"cov.{self.test}.{point}.{bin_name}")


# --- exhaustive scenarios -------------------------------------------------


def _weight_masks(n: int, weight: int) -> list[int]:
    masks = []
    for positions in combinations(range(n), weight):
        mask = 0
        for p in positions:
            mask |= 1 << p
        masks.append(mask)
    return masks


def run_ecc_exhaustive(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Decode every error pattern up to the scheme's guaranteed weight.

    All weight-w flips for 1 <= w <= t_correct + t_detect are applied to
    encoded sample words (every data value when the word is 8 bits wide,
    64 seeded samples otherwise) and the decode outcome is held to the
    capability bands: corrected exactly inside the correction radius,
    flagged uncorrectable inside the detection radius, and never silently
    clean inside the guarantee.
    """
    model = MemoryModel(cfg)
    scheme = model.scheme
    k, n = scheme.k, scheme.n
    t_correct, t_detect = scheme.t_correct, scheme.t_detect
    if t_correct + t_detect == 0:
        raise ValueError("ecc_exhaustive needs a detecting scheme")

    if k == 8:
        datas = list(range(256))
    else:
        rng = random.Random(seed)
        datas = [0, (1 << k) - 1]
        datas += [rng.getrandbits(k) for _ in range(ECC_SAMPLE_COUNT - 2)]
    words = [(d, encode(scheme, d)) for d in datas]

    for d, word in words:
        status, value = model.decode_word(word)
        col.check(
            "clean_ok",
            status == FLAG_OK and value == d,
            f"data={d:#x} clean decode gave ({status}, {value:#x})",
        )

    decode_word = model.decode_word
    for w in range(1, t_correct + t_detect + 1):
        masks = _weight_masks(n, w)
        violations: list[str] = []
        if w <= t_correct:
            name = "correct_band"
            for mask in masks:
                for d, word in words:
                    status, value = decode_word(word ^ mask)
                    if status != FLAG_CORRECTED or value != d:
                        if len(violations) < 3:
                            s = scheme.syndrome(word ^ mask)
                            violations.append(
                                f"w={w} data={d:#x} flips={mask:#x} "
                                f"syndrome={s:#x} gave ({status}, {value:#x})"
                            )
        elif w <= t_detect:
            name = "detect_band"
            for mask in masks:
                for d, word in words:
                    status, _ = decode_word(word ^ mask)
                    if status != FLAG_DETECTED:
                        if len(violations) < 3:
                            s = scheme.syndrome(word ^ mask)
                            violations.append(
                                f"w={w} data={d:#x} flips={mask:#x} "
                                f"syndrome={s:#x} gave status {status}"
                            )
        else:
            name = "no_silent_ok"
            for mask in masks:
                for d, word in words:
                    status, _ = decode_word(word ^ mask)
                    if status == FLAG_OK:
                        if len(violations) < 3:
                            s = scheme.syndrome(word ^ mask)
                            violations.append(
                                f"w={w} data={d:#x} flips={mask:#x} "
                                f"syndrome={s:#x} decoded silently clean"
                            )
        col.check(name, not violations, "; ".join(violations) or None)
        col.hit("weight", f"w{w}")
    if t_correct:
        col.hit("outcome", "corrected")
    col.hit("outcome", "detected")


def _boundary_addr(cls: str, addr_words: int, beats: int) -> int:
    if cls == "low":
        return 0
    if cls == "mid":
        return addr_words // 2
    if cls == "top":
        return addr_words - beats
    # oob: a burst straddling the top, or one past the end for singles
    return addr_words - 1 if beats > 1 else addr_words


def run_bus_decode_exhaustive(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Sweep every (op, burst, address class, power mode) decode case.

    Checks that the response status follows the decode rules, latency
    follows the technology constants, and rejected transactions leave the
    array and counters untouched.
    """
    model = MemoryModel(cfg)
    bursts = sorted(cfg.ahb_bursts)
    powers = ("active",) + tuple(sorted(cfg.lp_modes))
    k_mask = (1 << cfg.data_width) - 1
    cases = 0
    for power in powers:
        for op in ("read", "write"):
            for cls in ("low", "mid", "top", "oob"):
                for burst in bursts:
                    cases += 1
                    set_power_mode(model, power)
                    beats = BURST_BEATS[burst]
                    addr = _boundary_addr(cls, cfg.addr_words, beats)
                    data = (cases * 37 + 1) & k_mask if op == "write" else None
                    expect_error = power != "active" or cls == "oob"
                    label = f"op={op} burst={burst} addr_class={cls} power={power}"
                    txn = Transaction(op=op, addr=addr, data=data, burst=burst)
                    if expect_error:
                        array_before = list(model.array)
                        counters_before = (
                            model.counters.reads,
                            model.counters.writes,
                            model.counters.corrected,
                            model.counters.detected,
                        )
                    resp = exec_transaction(model, txn)
                    want = "error" if expect_error else "okay"
                    col.check(
                        "response_legality",
                        resp.status == want,
                        f"{label}: expected {want}, got {resp.status}",
                    )
                    if resp.status == "okay":
                        per_beat = (
                            model.read_latency if op == "read" else model.write_latency
                        )
                        col.check(
                            "latency_model",
                            resp.latency == beats * per_beat,
                            f"{label}: latency {resp.latency}, "
                            f"expected {beats * per_beat}",
                        )
                    else:
                        col.check(
                            "latency_model",
                            resp.latency == 0,
                            f"{label}: error response with latency {resp.latency}",
                        )
                    if expect_error and resp.status == "error":
                        untouched = model.array == array_before and counters_before == (
                            model.counters.reads,
                            model.counters.writes,
                            model.counters.corrected,
                            model.counters.detected,
                        )
                        col.check(
                            "state_preserved",
                            untouched,
                            f"{label}: rejected transaction changed state",
                        )
                    set_power_mode(model, "active")
                    col.hit("op", op)
                    col.hit("burst", burst)
                    col.hit("addr_class", cls)
                    col.hit("power", power)
    expected_cases = 2 * len(bursts) * 4 * len(powers)
    col.check(
        "case_count",
        cases == expected_cases,
        f"enumerated {cases} cases, expected {expected_cases}",
    )


# --- simulation scenarios -------------------------------------------------


def _write(model: MemoryModel, addr: int, data: int, burst: str = "single"):
    return exec_transaction(
        model, Transaction(op="write", addr=addr, data=data, burst=burst)
    )


def _read(model: MemoryModel, addr: int, burst: str = "single"):
    return exec_transaction(model, Transaction(op="read", addr=addr, burst=burst))


def run_burst_rw(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Burst writes and reads against single-beat references.

    A burst write must place its one data word at each incrementing beat
    address and nowhere else; a burst read must return the words single
    writes put there. Bases are chosen both aligned to and straddling
    8-word blocks.
    """
    rng = random.Random(seed)
    model = MemoryModel(cfg)
    words = cfg.addr_words
    k_mask = (1 << cfg.data_width) - 1
    for region in ("low", "high"):
        # each pass works inside a 16-word neighborhood within the region
        if words >= 32:
            start, end = (0, words // 2) if region == "low" else (words // 2, words)
        else:
            start, end = 0, words
        for burst in sorted(cfg.ahb_bursts):
            beats = BURST_BEATS[burst]
            offsets = [0]
            if beats > 1:
                # second base straddles an 8-word block boundary
                offsets.append(8 - beats + 1)
            for offset in offsets:
                block = start + 8 * rng.randrange((end - 16 - start) // 8 + 1)
                base = block + offset
                label = f"burst={burst} base={base}"

                # pre-fill the neighborhood so stale words are distinguishable
                fill = {}
                for a in range(block, block + 16):
                    fill[a] = (a * 13 + 5) & k_mask
                    _write(model, a, fill[a])

                value = rng.getrandbits(cfg.data_width)
                resp = _write(model, base, value, burst)
                col.check(
                    "response_ok",
                    resp.status == "okay",
                    f"{label}: burst write rejected",
                )
                for i in range(beats):
                    got = _read(model, base + i)
                    ok = got.status == "okay" and got.data == (value,)
                    col.check(
                        "readback_match",
                        ok,
                        f"{label}: beat {i} read {got.data} expected ({value},)",
                    )
                for a in range(block, block + 16):
                    if base <= a < base + beats:
                        continue
                    got = _read(model, a)
                    ok = got.status == "okay" and got.data == (fill[a],)
                    col.check(
                        "burst_write_extent",
                        ok,
                        f"{label}: untouched word {a} now {got.data}, "
                        f"expected ({fill[a]},)",
                    )

                expected = tuple(
                    (base + i * 7 + 3) & k_mask for i in range(beats)
                )
                for i, v in enumerate(expected):
                    _write(model, base + i, v)
                got = _read(model, base, burst)
                ok = got.status == "okay" and got.data == expected
                col.check(
                    "burst_read_match",
                    ok,
                    f"{label}: burst read {got.data}, expected {expected}",
                )
                col.hit("burst", burst)
                col.hit("region", region)


def run_random_rw(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Randomized single-beat traffic checked against a shadow map."""
    rng = random.Random(seed)
    model = MemoryModel(cfg)
    words = cfg.addr_words
    shadow: dict[int, int] = {}
    regions = {
        "low": range(0, 4),
        "mid": range(words // 2 - 2, words // 2 + 2),
        "high": range(words - 4, words),
    }
    # guaranteed ops so every declared bin is reachable in one run
    plan = [("read", "oob"), ("idle", "low")]
    for region in ("low", "mid", "high"):
        plan.append(("write", region))
        plan.append(("read", region))
    for _ in range(RANDOM_OP_COUNT):
        plan.append(
            (
                rng.choice(("read", "read", "write", "write", "write", "idle")),
                rng.choice(("low", "mid", "high")),
            )
        )
    rng.shuffle(plan)
    for op, region in plan:
        if op == "idle":
            resp = exec_transaction(model, Transaction(op="idle"))
            col.check(
                "response_legality",
                resp.status == "okay" and resp.latency == 0,
                f"idle gave ({resp.status}, latency={resp.latency})",
            )
            col.hit("op", "idle")
            continue
        if region == "oob":
            resp = _read(model, words)
            col.check(
                "response_legality",
                resp.status == "error",
                f"read past the end gave {resp.status}",
            )
            col.hit("op", "read")
            col.hit("response", "error")
            continue
        addr = rng.choice(regions[region])
        if op == "write":
            data = rng.getrandbits(cfg.data_width)
            resp = _write(model, addr, data)
            col.check(
                "response_legality",
                resp.status == "okay",
                f"write addr={addr} rejected",
            )
            shadow[addr] = data
        else:
            resp = _read(model, addr)
            expected = shadow.get(addr, 0)
            col.check(
                "response_legality",
                resp.status == "okay",
                f"read addr={addr} rejected",
            )
            col.check(
                "shadow_match",
                resp.data == (expected,),
                f"read addr={addr} gave {resp.data}, expected ({expected},)",
            )
            col.check(
                "flags_clean",
                resp.ecc_flags == (FLAG_OK,),
                f"read addr={addr} flagged {resp.ecc_flags}",
            )
        col.hit("op", op)
        col.hit("region", region)
        col.hit("response", resp.status)


def run_power_cycle(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Exercise low-power entry, wake-up guarantees, and mode rejection.

    Retention must preserve stored words bit-exactly (clean decode flags);
    shutdown must invalidate every word to the all-ones codeword; modes
    outside the configuration must be refused without a state change.
    """
    rng = random.Random(seed)
    model = MemoryModel(cfg)
    words = cfg.addr_words
    addrs = [0, 1, words // 2, words - 1]
    scheme = model.scheme
    col.hit("mode", "active")

    if "retention" in cfg.lp_modes:
        stored = {a: rng.getrandbits(cfg.data_width) for a in addrs}
        for a, d in stored.items():
            _write(model, a, d)
        entered = set_power_mode(model, "retention")
        blocked = _read(model, 0)
        col.check(
            "lp_entry_ok",
            entered and blocked.status == "error",
            f"retention entry={entered}, read while down={blocked.status}",
        )
        col.hit("mode", "retention")
        set_power_mode(model, "active")
        col.hit("mode", "active")
        for a, d in stored.items():
            got = _read(model, a)
            ok = (
                got.status == "okay"
                and got.data == (d,)
                and got.ecc_flags == (FLAG_OK,)
            )
            col.check(
                "retention_intact",
                ok,
                f"addr={a} after retention gave ({got.status}, {got.data}, "
                f"{got.ecc_flags}), expected clean ({d},)",
            )
        col.hit("wake", "retention_intact")

    if "shutdown" in cfg.lp_modes:
        stored = {a: rng.getrandbits(cfg.data_width) for a in addrs}
        for a, d in stored.items():
            _write(model, a, d)
        entered = set_power_mode(model, "shutdown")
        blocked = _read(model, 0)
        col.check(
            "lp_entry_ok",
            entered and blocked.status == "error",
            f"shutdown entry={entered}, read while down={blocked.status}",
        )
        col.hit("mode", "shutdown")
        set_power_mode(model, "active")
        col.hit("mode", "active")
        want_status, want_value = decode(scheme, (1 << scheme.n) - 1)
        for a in addrs:
            got = _read(model, a)
            ok = (
                got.status == "okay"
                and got.ecc_flags == (want_status,)
                and got.data == (want_value,)
            )
            col.check(
                "shutdown_invalidated",
                ok,
                f"addr={a} after shutdown gave ({got.ecc_flags}, {got.data}), "
                f"expected ({want_status}, {want_value:#x})",
            )
        col.hit("wake", "shutdown_invalidated")

    rejected_ok = True
    detail = []
    for mode in ("retention", "shutdown"):
        if mode in cfg.lp_modes:
            continue
        before = model.power_mode
        accepted = set_power_mode(model, mode)
        if accepted or model.power_mode != before:
            rejected_ok = False
            detail.append(f"unconfigured mode {mode} accepted")
    col.check("mode_reject", rejected_ok, "; ".join(detail) or None)


def run_fault_sweep(
    cfg: IpConfiguration, desc: TestDescriptor, seed: int, col: Collector
) -> None:
    """Inject seeded bit flips of each weight and hold reads to the
    correction and detection bands."""
    rng = random.Random(seed)
    model = MemoryModel(cfg)
    scheme = model.scheme
    n = scheme.n
    t_correct, t_detect = scheme.t_correct, scheme.t_detect
    if t_correct + t_detect == 0:
        raise ValueError("fault_sweep needs a detecting scheme")
    for w in range(1, t_correct + t_detect + 1):
        for _ in range(FAULTS_PER_WEIGHT):
            addr = rng.randrange(cfg.addr_words)
            data = rng.getrandbits(cfg.data_width)
            mask = 0
            for p in rng.sample(range(n), w):
                mask |= 1 << p
            resp = _write(model, addr, data)
            col.check(
                "response_ok", resp.status == "okay", f"write addr={addr} rejected"
            )
            inject_fault(model, addr, mask)
            got = _read(model, addr)
            flag = got.ecc_flags[0]
            label = f"w={w} addr={addr} data={data:#x} flips={mask:#x}"
            if w <= t_correct:
                ok = flag == FLAG_CORRECTED and got.data == (data,)
                col.check(
                    "correct_band",
                    ok,
                    f"{label}: gave ({flag}, {got.data}), expected corrected exact",
                )
            elif w <= t_detect:
                col.check(
                    "detect_band",
                    flag == FLAG_DETECTED,
                    f"{label}: flag {flag}, expected {FLAG_DETECTED}",
                )
            else:
                col.check(
                    "no_silent_ok",
                    flag != FLAG_OK,
                    f"{label}: decoded silently clean",
                )
            col.hit("weight", f"w{w}")
            if flag in (FLAG_CORRECTED, FLAG_DETECTED):
                col.hit(
                    "flag",
                    "corrected" if flag == FLAG_CORRECTED else "detected",
                )
            _write(model, addr, data)  # repair before the next injection


SCENARIO_RUNNERS = {
    "ecc_exhaustive": run_ecc_exhaustive,
    "bus_decode_exhaustive": run_bus_decode_exhaustive,
    "burst_rw": run_burst_rw,
    "random_rw": run_random_rw,
    "power_cycle": run_power_cycle,
    "fault_sweep": run_fault_sweep,
}
