"""Error detection/correction schemes: parity, extended Hamming, and a
deterministic distance-6 code for double-correction/triple-detection.

Codewords are systematic integers: data bits occupy positions 0..k-1, check
bits are appended. Decoding is syndrome-table driven at every level so the
behavior is uniform and exhaustively verifiable at desk widths.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

CAPABILITIES = {
    "none": (0, 0),
    "sed": (0, 1),
    "secded": (1, 2),
    "dected": (2, 3),
}

STATUS_OK = "ok"
STATUS_CORRECTED = "corrected"
STATUS_DETECTED = "detected_uncorrectable"


class UnsupportedEccError(ValueError):
    """Raised for (level, k) pairs outside the construction bounds."""


@dataclass(frozen=True)
class EccScheme:
    """A constructed code: per-position syndrome columns plus decode table.

    ``columns[i]`` is the r-bit syndrome contribution of codeword bit i, i.e.
    column i of the parity-check matrix H. ``encode_basis[i]`` is the full
    codeword for the single data bit i, so encoding is an XOR fold.
    """

    level: str
    k: int
    r: int
    columns: tuple[int, ...]
    encode_basis: tuple[int, ...]
    syndrome_table: dict[int, int]  # syndrome -> correctable error pattern
    t_correct: int
    t_detect: int

    @property
    def n(self) -> int:
        return self.k + self.r

    @property
    def parity_check_rows(self) -> tuple[int, ...]:
        """H as row bitmasks: bit j of row i is H[i][j]."""
        rows = []
        for i in range(self.r):
            row = 0
            for j, col in enumerate(self.columns):
                if (col >> i) & 1:
                    row |= 1 << j
            rows.append(row)
        return tuple(rows)

    def syndrome(self, word: int) -> int:
        tables = _syndrome_byte_tables(self.level, self.k)
        s = 0
        index = 0
        while word:
            s ^= tables[index][word & 0xFF]
            word >>= 8
            index += 1
        return s


@lru_cache(maxsize=None)
def _syndrome_byte_tables(level: str, k: int) -> tuple[tuple[int, ...], ...]:
    """Per-byte syndrome contributions so syndrome() costs one table lookup
    per codeword byte instead of one XOR per set bit."""
    columns = build_ecc(level, k).columns
    tables = []
    for base in range(0, len(columns), 8):
        chunk = columns[base:base + 8]
        table = []
        for byte in range(256):
            s = 0
            for bit, col in enumerate(chunk):
                if (byte >> bit) & 1:
                    s ^= col
            table.append(s)
        tables.append(tuple(table))
    return tuple(tables)


def encode(scheme: EccScheme, data: int) -> int:
    """Systematic codeword for ``data`` (must fit k bits)."""
    if data < 0 or data >> scheme.k:
        raise ValueError(f"data does not fit {scheme.k} bits: {data:#x}")
    word = 0
    d = data
    while d:
        low = d & -d
        word ^= scheme.encode_basis[low.bit_length() - 1]
        d ^= low
    return word


def decode(scheme: EccScheme, word: int, syndrome_table: dict[int, int] | None = None):
    """Decode a codeword; returns (status, data).

    Zero syndrome extracts directly; a tabled syndrome removes the associated
    error pattern; anything else is detected-uncorrectable and the data is the
    uncorrected extraction. ``syndrome_table`` overrides the scheme's table
    (used by the seeded-bug machinery only).
    """
    if word < 0 or word >> scheme.n:
        raise ValueError(f"word does not fit {scheme.n} bits: {word:#x}")
    mask = (1 << scheme.k) - 1
    s = scheme.syndrome(word)
    if s == 0:
        return STATUS_OK, word & mask
    table = scheme.syndrome_table if syndrome_table is None else syndrome_table
    pattern = table.get(s)
    if pattern is not None:
        return STATUS_CORRECTED, (word ^ pattern) & mask
    return STATUS_DETECTED, word & mask


@lru_cache(maxsize=None)
def build_ecc(level: str, k: int) -> EccScheme:
    """Construct the scheme for a capability level at data width k.

    none/sed/secded support k in {8,16,32}; dected is bounded to {8,16} by
    construction cost. For k <= 16 the minimum distance is verified by brute
    force over all codewords at construction time.
    """
    if level not in CAPABILITIES:
        raise UnsupportedEccError(f"unknown ecc level {level!r}")
    if k not in (8, 16, 32):
        raise UnsupportedEccError(f"unsupported data width {k}")
    if level == "dected" and k not in (8, 16):
        raise UnsupportedEccError("dected is only constructed for k in {8, 16}")

    t_correct, t_detect = CAPABILITIES[level]
    if level == "none":
        r = 0
        data_columns = []
        columns: tuple[int, ...] = (0,) * k  # H has no rows; every column is 0
    elif level == "sed":
        r = 1
        data_columns = [1] * k
        columns = tuple([1] * (k + 1))
    elif level == "secded":
        r, data_columns, columns = _extended_hamming_columns(k)
    else:
        r, data_columns, columns = _greedy_distance6_columns(k)

    encode_basis = _systematic_basis(k, r, data_columns, columns)
    table = _syndrome_table(columns, t_correct)
    scheme = EccScheme(level=level, k=k, r=r, columns=columns,
                       encode_basis=tuple(encode_basis), syndrome_table=table,
                       t_correct=t_correct, t_detect=t_detect)
    if k <= 16:
        min_dist = minimum_distance(scheme)
        if level != "none" and min_dist < t_correct + t_detect + 1:
            raise AssertionError(
                f"constructed {level} k={k} has distance {min_dist} < "
                f"{t_correct + t_detect + 1}")
    return scheme


def _extended_hamming_columns(k: int) -> tuple[int, list[int], tuple[int, ...]]:
    """Extended Hamming: h Hamming rows plus an overall parity row.

    Data columns are the non-power-of-two Hamming column values in increasing
    order; check columns are the Hamming unit vectors; the final position is
    the overall parity bit. The parity row (bit h) covers every position.
    """
    h = 1
    while (1 << h) < k + h + 1:
        h += 1
    r = h + 1
    parity_bit = 1 << h
    data_columns = []
    value = 3
    while len(data_columns) < k:
        if value & (value - 1):  # skip powers of two
            data_columns.append(value)
        value += 1
    columns = ([c | parity_bit for c in data_columns]
               + [(1 << i) | parity_bit for i in range(h)]
               + [parity_bit])
    return r, [c | parity_bit for c in data_columns], tuple(columns)


def _greedy_distance6_columns(k: int) -> tuple[int, list[int], tuple[int, ...]]:
    """Smallest r for which a greedy scan of candidate columns 1..2^r-1 (in
    increasing order) collects n = k + r columns while keeping the minimum
    distance >= 6, i.e. every subset of <= 5 columns linearly independent.

    The acceptance test is maintained incrementally: a candidate is rejected
    iff it equals the XOR of <= 4 already-accepted columns (equivalent to the
    exhaustive weight scan over the partial code).
    """
    r = 1
    while True:
        n = k + r
        accepted: list[int] = []
        x1: set[int] = set()
        x2: set[int] = set()
        x3: set[int] = set()
        x4: set[int] = set()
        for cand in range(1, 1 << r):
            if cand in x1 or cand in x2 or cand in x3 or cand in x4:
                continue
            x4 |= {cand ^ v for v in x3}
            x3 |= {cand ^ v for v in x2}
            x2 |= {cand ^ v for v in x1}
            x1.add(cand)
            accepted.append(cand)
            if len(accepted) == n:
                powers = [1 << i for i in range(r)]
                data_columns = [c for c in accepted if c not in powers]
                if len(data_columns) != k:
                    raise AssertionError(
                        "greedy column set lacks a full identity block")
                # data positions first (greedy order), then the unit columns
                return r, data_columns, tuple(data_columns + powers)
        r += 1


def _systematic_basis(k: int, r: int, data_columns: list[int],
                      columns: tuple[int, ...]) -> list[int]:
    """Per-data-bit codewords solving H * codeword = 0 for the check bits."""
    if r == 0:
        return [1 << i for i in range(k)]
    check_columns = list(columns[k:])
    inverse = _gf2_inverse_columns(check_columns, r)
    basis = []
    for i in range(k):
        target = data_columns[i]
        checks = 0
        t = target
        while t:
            low = t & -t
            checks ^= inverse[low.bit_length() - 1]
            t ^= low
        basis.append((1 << i) | (checks << k))
    return basis


def _gf2_inverse_columns(check_columns: list[int], r: int) -> list[int]:
    """inverse[b] = x with XOR of check columns selected by x equal to e_b."""
    # Gauss-Jordan on [C | I] where C's columns are the check columns
    rows = []
    for i in range(r):
        c_row = 0
        for j, col in enumerate(check_columns):
            if (col >> i) & 1:
                c_row |= 1 << j
        rows.append((c_row, 1 << i))
    pivot_row_for_col = {}
    for col in range(r):
        pivot = None
        for idx in range(r):
            if idx in pivot_row_for_col.values():
                continue
            if (rows[idx][0] >> col) & 1:
                pivot = idx
                break
        if pivot is None:
            raise AssertionError("check columns are singular")
        pivot_row_for_col[col] = pivot
        for idx in range(r):
            if idx != pivot and (rows[idx][0] >> col) & 1:
                rows[idx] = (rows[idx][0] ^ rows[pivot][0],
                             rows[idx][1] ^ rows[pivot][1])
    inverse = [0] * r
    for col, idx in pivot_row_for_col.items():
        aug = rows[idx][1]
        for b in range(r):
            if (aug >> b) & 1:
                inverse[b] |= 1 << col
    return inverse


def _syndrome_table(columns: tuple[int, ...], t_correct: int) -> dict[int, int]:
    table = {0: 0}
    n = len(columns)
    if t_correct >= 1:
        for i in range(n):
            s = columns[i]
            if s in table:
                raise AssertionError("duplicate weight-1 syndrome")
            table[s] = 1 << i
    if t_correct >= 2:
        for i in range(n):
            for j in range(i + 1, n):
                s = columns[i] ^ columns[j]
                if s in table:
                    raise AssertionError("duplicate weight-2 syndrome")
                table[s] = (1 << i) | (1 << j)
    return table


def minimum_distance(scheme: EccScheme) -> int:
    """Brute-force minimum codeword weight over all nonzero data values."""
    best = scheme.n + 1
    for d in range(1, 1 << scheme.k):
        w = encode(scheme, d).bit_count()
        if w < best:
            best = w
    return best
