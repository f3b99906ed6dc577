"""Error-correction scheme tests.

Expected parameters (r, n, minimum distance, column sets, decode outcomes)
were computed once with independent scripts (exhaustive weight scans, literal
greedy search, matrix arithmetic) and are frozen here as goldens.
"""

import itertools
import random

import pytest

from reqflow.dut import UnsupportedEccError, build_ecc, decode, encode
from reqflow.dut.ecc import minimum_distance

GOLDEN_PARAMS = {
    # (level, k): (r, n)
    ("none", 8): (0, 8),
    ("none", 16): (0, 16),
    ("none", 32): (0, 32),
    ("sed", 8): (1, 9),
    ("sed", 16): (1, 17),
    ("sed", 32): (1, 33),
    ("secded", 8): (5, 13),
    ("secded", 16): (6, 22),
    ("secded", 32): (7, 39),
    ("dected", 8): (9, 17),
    ("dected", 16): (11, 27),
}

GOLDEN_DISTANCE = {
    # brute-force minimum codeword weight, k <= 16 only
    ("sed", 8): 2,
    ("sed", 16): 2,
    ("secded", 8): 4,
    ("secded", 16): 4,
    ("dected", 8): 6,
    ("dected", 16): 6,
}

DECTED8_COLUMNS = [1, 2, 4, 8, 16, 31, 32, 64, 103, 128, 171, 213, 256, 301,
                   342, 439, 475]
DECTED16_COLUMNS = [1, 2, 4, 8, 16, 31, 32, 64, 103, 128, 171, 213, 256, 301,
                    342, 439, 475, 494, 512, 558, 595, 911, 1024, 1075, 1114,
                    1189, 1287]


@pytest.mark.parametrize("level,k", sorted(GOLDEN_PARAMS))
def test_golden_parameters(level, k):
    scheme = build_ecc(level, k)
    assert (scheme.r, scheme.n) == GOLDEN_PARAMS[(level, k)]
    assert scheme.k == k
    assert len(scheme.columns) == scheme.n


@pytest.mark.parametrize("level,k", sorted(GOLDEN_DISTANCE))
def test_golden_minimum_distance(level, k):
    scheme = build_ecc(level, k)
    # independent recount: minimum weight over every nonzero data value
    best = min(encode(scheme, d).bit_count() for d in range(1, 1 << k))
    assert best == GOLDEN_DISTANCE[(level, k)]
    assert minimum_distance(scheme) == best


@pytest.mark.parametrize("level", ["none", "sed", "secded", "dected"])
def test_parity_check_annihilates_codewords(level):
    # H * encode(d) = 0, verified by row-mask arithmetic independent of the
    # scheme's own syndrome helper
    scheme = build_ecc(level, 8)
    rows = scheme.parity_check_rows
    assert len(rows) == scheme.r
    for d in range(256):
        word = encode(scheme, d)
        assert word & ((1 << scheme.k) - 1) == d  # systematic
        for row in rows:
            assert (row & word).bit_count() % 2 == 0


@pytest.mark.parametrize("level", ["none", "sed", "secded", "dected"])
def test_decode_inverts_encode(level):
    scheme = build_ecc(level, 8)
    for d in range(256):
        assert decode(scheme, encode(scheme, d)) == ("ok", d)


def test_none_is_identity():
    scheme = build_ecc("none", 8)
    for d in range(256):
        assert encode(scheme, d) == d


def test_sed_is_even_parity():
    scheme = build_ecc("sed", 8)
    for d in range(256):
        word = encode(scheme, d)
        assert word.bit_count() % 2 == 0
        for pos in range(scheme.n):
            status, _ = decode(scheme, word ^ (1 << pos))
            assert status == "detected_uncorrectable"


def test_secded8_corrects_every_single_flip():
    scheme = build_ecc("secded", 8)
    for d in range(256):
        word = encode(scheme, d)
        for pos in range(scheme.n):
            assert decode(scheme, word ^ (1 << pos)) == ("corrected", d)


def test_secded8_detects_every_double_flip():
    scheme = build_ecc("secded", 8)
    pairs = [(1 << i) | (1 << j)
             for i, j in itertools.combinations(range(scheme.n), 2)]
    for d in range(256):
        word = encode(scheme, d)
        for mask in pairs:
            status, _ = decode(scheme, word ^ mask)
            assert status == "detected_uncorrectable"


def test_secded8_weight3_never_silently_ok():
    # beyond the detection guarantee a distance-4 code may miscorrect, but a
    # weight-3 error can never produce a zero syndrome
    scheme = build_ecc("secded", 8)
    masks = [sum(1 << i for i in c)
             for c in itertools.combinations(range(scheme.n), 3)]
    miscorrected = 0
    for d in range(0, 256, 17):
        word = encode(scheme, d)
        for mask in masks:
            status, data = decode(scheme, word ^ mask)
            assert status != "ok"
            if status == "corrected" and data != d:
                miscorrected += 1
    assert miscorrected > 0  # the guarantee band genuinely stops at weight 2


def test_dected8_corrects_all_weight_le2():
    scheme = build_ecc("dected", 8)
    masks = [1 << i for i in range(scheme.n)]
    masks += [(1 << i) | (1 << j)
              for i, j in itertools.combinations(range(scheme.n), 2)]
    for d in range(256):
        word = encode(scheme, d)
        for mask in masks:
            assert decode(scheme, word ^ mask) == ("corrected", d)


def test_dected8_detects_all_weight3():
    scheme = build_ecc("dected", 8)
    masks = [sum(1 << i for i in c)
             for c in itertools.combinations(range(scheme.n), 3)]
    for d in range(0, 256, 5):
        word = encode(scheme, d)
        for mask in masks:
            status, _ = decode(scheme, word ^ mask)
            assert status == "detected_uncorrectable"


def test_dected8_golden_columns():
    scheme = build_ecc("dected", 8)
    assert sorted(scheme.columns) == DECTED8_COLUMNS
    # data positions carry the non-unit columns in acceptance order
    powers = [1 << i for i in range(scheme.r)]
    assert list(scheme.columns[8:]) == powers
    assert list(scheme.columns[:8]) == [c for c in DECTED8_COLUMNS
                                        if c not in powers]


def test_dected16_golden_columns():
    scheme = build_ecc("dected", 16)
    assert sorted(scheme.columns) == DECTED16_COLUMNS


def test_dected8_matches_literal_greedy():
    # literal search: scan candidates in increasing order, accept one iff all
    # column subsets of size <= 5 remain linearly independent, checked by
    # exhaustive subset enumeration
    def literal_greedy(r, n):
        accepted = []
        for cand in range(1, 1 << r):
            ok = True
            for size in range(5):
                for combo in itertools.combinations(accepted, size):
                    acc = cand
                    for col in combo:
                        acc ^= col
                    if acc == 0:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                accepted.append(cand)
                if len(accepted) == n:
                    return accepted
        return accepted

    assert len(literal_greedy(8, 16)) < 16  # r=8 stalls, so r=9 is minimal
    scheme = build_ecc("dected", 8)
    assert sorted(literal_greedy(9, 17)) == sorted(scheme.columns)


def test_syndrome_table_sizes_and_roundtrip():
    secded = build_ecc("secded", 8)
    assert len(secded.syndrome_table) == 1 + secded.n  # zero plus weight-1
    dected = build_ecc("dected", 8)
    assert len(dected.syndrome_table) == 1 + 17 + 136  # zero, weight-1, weight-2
    assert dected.syndrome_table[0] == 0
    for i in range(dected.n):
        for j in range(i, dected.n):
            pattern = (1 << i) | (1 << j)
            assert dected.syndrome_table[dected.syndrome(pattern)] == pattern


ALL_ONES_DECODE = {
    # frozen decode of the all-ones word (the shutdown invalidation pattern)
    ("secded", 8): ("corrected", 0x7F),
    ("secded", 16): "detected_uncorrectable",
    ("secded", 32): "detected_uncorrectable",
    ("dected", 8): ("detected_uncorrectable", 0xFF),
    ("dected", 16): "detected_uncorrectable",
    ("sed", 8): "detected_uncorrectable",
}


@pytest.mark.parametrize("level,k", sorted(ALL_ONES_DECODE))
def test_all_ones_decode(level, k):
    scheme = build_ecc(level, k)
    expected = ALL_ONES_DECODE[(level, k)]
    result = decode(scheme, (1 << scheme.n) - 1)
    if isinstance(expected, tuple):
        assert result == expected
    else:
        assert result[0] == expected


@pytest.mark.parametrize("level,k", [
    ("dected", 32),
    ("secded", 12),
    ("none", 64),
    ("parity", 8),
])
def test_unsupported_pairs_rejected(level, k):
    with pytest.raises(UnsupportedEccError):
        build_ecc(level, k)


def test_input_width_validation():
    scheme = build_ecc("secded", 8)
    with pytest.raises(ValueError):
        encode(scheme, 256)
    with pytest.raises(ValueError):
        encode(scheme, -1)
    with pytest.raises(ValueError):
        decode(scheme, 1 << scheme.n)


def test_k16_sampled_capability_bands():
    rng = random.Random(20240811)
    for level in ("sed", "secded", "dected"):
        scheme = build_ecc(level, 16)
        for weight in range(1, scheme.t_correct + scheme.t_detect + 1):
            for _ in range(200):
                d = rng.getrandbits(16)
                positions = rng.sample(range(scheme.n), weight)
                mask = sum(1 << p for p in positions)
                status, data = decode(scheme, encode(scheme, d) ^ mask)
                if weight <= scheme.t_correct:
                    assert (status, data) == ("corrected", d)
                elif weight <= scheme.t_detect:
                    assert status == "detected_uncorrectable"
                else:
                    assert status != "ok"


def test_build_is_cached():
    assert build_ecc("secded", 8) is build_ecc("secded", 8)
