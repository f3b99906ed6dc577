"""Shipped superset: requirements, testcases, and a waiver for the
configurable memory subsystem.

Thirty-two requirements and sixty testcases span storage, bus decode,
bursts, error protection, low-power modes, technology corners, and data
widths. Applicability predicates thin the superset down per configuration,
and the verifies relationships keep every applicable requirement covered by
at least one applicable testcase under every valid configuration (one
requirement is instead waived on unprotected parts). All items arrive
approved, with the draft and review steps in their history.

Testcase titles drive scenario selection during test generation ("ecc",
"bus"/"decode" for the exhaustive suites; "burst", "power", "fault" for
the simulation ones), so they double as generation keywords.
"""

from __future__ import annotations

from reqflow.rmt.store import Relationship, RmtItem, RmtStore

# (title, applicability, verified hwrq numbers)
_HWRQS = (
    ("Configured word width is stored and returned intact", "true"),
    ("Memory powers up with all words readable as zero", "true"),
    ("Word writes are idempotent and last-writer-wins", "true"),
    ("Idle transactions complete without side effects", "true"),
    ("Accesses beyond the configured address range are rejected", "true"),
    ("Rejected transactions leave memory contents untouched", "true"),
    ("Rejected transactions leave access counters untouched", "true"),
    ("Unconfigured burst kinds are rejected", "true"),
    ("Single-beat transfers are always available", "true"),
    ("Error responses carry zero latency", "true"),
    ("incr4 bursts access four consecutive words", 'ahb_bursts has "incr4"'),
    ("incr8 bursts access eight consecutive words", 'ahb_bursts has "incr8"'),
    ("A burst write replicates its data word across all beats",
     'ahb_bursts has "incr4" || ahb_bursts has "incr8"'),
    ("Bursts increment across 8-word block boundaries",
     'ahb_bursts has "incr4" || ahb_bursts has "incr8"'),
    ("Single-bit storage errors are detected", "ecc >= sed"),
    ("Single-bit storage errors are corrected", "ecc >= secded"),
    ("Double-bit storage errors are detected", "ecc >= secded"),
    ("Double-bit storage errors are corrected", "ecc == dected"),
    ("Triple-bit storage errors are detected", "ecc == dected"),
    ("Guaranteed error weights never decode silently clean", "ecc != none"),
    ("Clean codewords decode with a clean flag", "ecc != none"),
    ("Corrected reads report the corrected flag", "ecc >= secded"),
    ("Retention preserves stored words bit-exactly", 'lp_modes has "retention"'),
    ("Shutdown invalidates every stored word", 'lp_modes has "shutdown"'),
    ("Reads and writes are refused outside active mode",
     'lp_modes has "retention" || lp_modes has "shutdown"'),
    ("Unconfigured power modes are refused without state change",
     'lp_modes has "retention" || lp_modes has "shutdown"'),
    ("Shutdown wake-up requires a data integrity scrub",
     'lp_modes has "shutdown"'),
    ("High-density arrays respond with two-cycle access latency",
     "tech == sram_hd"),
    ("High-speed arrays respond with single-cycle access latency",
     "tech == sram_hs"),
    ("Resistive arrays respond with three-cycle reads and five-cycle writes",
     "tech == rram"),
    ("Full-width 32-bit data paths store complete words", "data_width == 32"),
    ("Address space covers the configured word count", "true"),
)

# (title, domain, applicability, verifies)
_TESTCASES = (
    ("ECC capability exhaustive decode sweep", "formal", "ecc != none",
     (15, 16, 17, 18, 19, 20, 21, 22)),
    ("Bus decode legality exhaustive sweep", "formal", "true",
     (5, 6, 7, 8, 9, 10, 25, 28, 29, 30)),
    ("Sequential write then readback across the array", "simulation", "true",
     (1, 2, 3, 32)),
    ("Random access soak with shadow reference", "simulation", "true", (1, 3)),
    ("Back-to-back writes to one address", "simulation", "true", (3,)),
    ("Idle insertion between transfers", "simulation", "true", (4,)),
    ("Read-before-write returns zeros", "simulation", "true", (2,)),
    ("Boundary address stress at array edges", "simulation", "true", (5, 32)),
    ("Narrow data path soak", "simulation", "data_width == 8", (1,)),
    ("Halfword data path soak", "simulation", "data_width == 16", (1,)),
    ("Full-width data path soak", "simulation", "data_width == 32", (1, 31)),
    ("High-density array access soak", "simulation", "tech == sram_hd", (1,)),
    ("High-speed array access soak", "simulation", "tech == sram_hs", (1,)),
    ("Resistive array access soak", "simulation", "tech == rram", (1,)),
    ("Write data patterns walking ones", "simulation", "true", (1,)),
    ("Write data patterns walking zeros", "simulation", "true", (1,)),
    ("Alternating checkerboard data soak", "simulation", "true", (1,)),
    ("Address aliasing independence", "simulation", "true", (1, 32)),
    ("Mid-range address traffic", "simulation", "true", (32,)),
    ("Low address region traffic", "simulation", "true", (32,)),
    ("High address region traffic", "simulation", "true", (32,)),
    ("Small array full sweep", "simulation", "addr_words <= 64", (32,)),
    ("Large array sparse sweep", "simulation", "addr_words >= 1024", (32,)),
    ("Read stability repeated reads", "simulation", "true", (1,)),
    ("Sparse address scatter writes", "simulation", "true", (32,)),
    ("Dense address cluster writes", "simulation", "true", (32,)),
    ("Interleaved read write mix", "simulation", "true", (1,)),
    ("Data stability across long idle gaps", "simulation", "true", (4,)),
    ("Burst write replication readback incr4", "simulation",
     'ahb_bursts has "incr4"', (11, 13)),
    ("Burst write replication readback incr8", "simulation",
     'ahb_bursts has "incr8"', (12, 13)),
    ("Burst read data ordering incr4", "simulation",
     'ahb_bursts has "incr4"', (11,)),
    ("Burst read data ordering incr8", "simulation",
     'ahb_bursts has "incr8"', (12,)),
    ("Burst block boundary straddle incr4", "simulation",
     'ahb_bursts has "incr4"', (14,)),
    ("Burst block boundary straddle incr8", "simulation",
     'ahb_bursts has "incr8"', (14,)),
    ("Burst neighbors stay untouched incr4", "simulation",
     'ahb_bursts has "incr4"', (6, 13)),
    ("Burst traffic low region", "simulation",
     'ahb_bursts has "incr4" || ahb_bursts has "incr8"', (13,)),
    ("Burst traffic high region", "simulation",
     'ahb_bursts has "incr4" || ahb_bursts has "incr8"', (13,)),
    ("Burst single interleave", "simulation", "true", (9,)),
    ("Burst mixed kinds sweep", "simulation", "true", (9, 13)),
    ("Burst writes across technology corners", "simulation",
     'ahb_bursts has "incr4" || ahb_bursts has "incr8"', (13,)),
    ("Power retention data preservation", "simulation",
     'lp_modes has "retention"', (23, 25, 26)),
    ("Power retention flag cleanliness", "simulation",
     'lp_modes has "retention"', (23,)),
    ("Power shutdown invalidation readback", "simulation",
     'lp_modes has "shutdown"', (24, 25, 26)),
    ("Power shutdown reentry idempotence", "simulation",
     'lp_modes has "shutdown"', (24,)),
    ("Power mode rejection of unconfigured modes", "simulation",
     'lp_modes has "retention" || lp_modes has "shutdown"', (26,)),
    ("Power cycle repeated retention entries", "simulation",
     'lp_modes has "retention"', (23,)),
    ("Power cycle retention with traffic", "simulation",
     'lp_modes has "retention"', (23, 25)),
    ("Power shutdown all addresses invalidated", "simulation",
     'lp_modes has "shutdown"', (24,)),
    ("Power cycling across both modes", "simulation",
     'lp_modes has "retention" && lp_modes has "shutdown"', (23, 24)),
    ("Power shutdown scrub readback under protection", "simulation",
     'lp_modes has "shutdown" && ecc != none', (27,)),
    ("Fault injection single bit flips", "simulation", "ecc >= sed", (15, 16)),
    ("Fault injection double bit flips", "simulation", "ecc >= secded",
     (17, 18)),
    ("Fault injection triple bit flips", "simulation", "ecc == dected", (19,)),
    ("Fault injection guard band weights", "simulation", "ecc != none", (20,)),
    ("Fault injection corrected flag reporting", "simulation",
     "ecc >= secded", (22,)),
    ("Fault injection sweep across addresses", "simulation", "ecc != none",
     (20,)),
    ("Fault injection repair after readback", "simulation", "ecc != none",
     (20,)),
    ("Fault injection on resistive arrays", "simulation",
     "ecc != none && tech == rram", (20,)),
    ("Fault injection wide word protection", "simulation",
     "ecc != none && data_width == 32", (31,)),
    ("Fault injection detection flags", "simulation", "ecc >= sed", (15,)),
)

# (title, target hwrq number, applicability)
_WAIVERS = (
    ("Scrub requirement waived for unprotected parts", 27,
     'lp_modes has "shutdown" && ecc == none'),
)


def install_superset(store: RmtStore) -> None:
    """Post the shipped superset into a store and approve every item."""
    hwrq_ids = []
    for title, applicability in _HWRQS:
        hwrq_ids.append(
            store.post_item(
                RmtItem(
                    id=None,
                    kind="hwrq",
                    title=title,
                    text=f"The subsystem shall guarantee: {title.lower()}.",
                    applicability=applicability,
                )
            )
        )
    tc_ids = []
    for title, domain, applicability, _ in _TESTCASES:
        tc_ids.append(
            store.post_item(
                RmtItem(
                    id=None,
                    kind="testcase",
                    title=title,
                    text=f"Exercise and check: {title.lower()}.",
                    domain=domain,
                    applicability=applicability,
                )
            )
        )
    waiver_ids = []
    for title, target_no, applicability in _WAIVERS:
        waiver_ids.append(
            store.post_item(
                RmtItem(
                    id=None,
                    kind="waiver",
                    title=title,
                    text="Unprotected parts cannot scrub; risk accepted.",
                    applicability=applicability,
                    target=hwrq_ids[target_no - 1],
                )
            )
        )
    for tc_id, (_, _, _, verifies) in zip(tc_ids, _TESTCASES):
        for hwrq_no in verifies:
            store.post_relationship(
                Relationship(from_id=tc_id, to_id=hwrq_ids[hwrq_no - 1],
                             kind="verifies")
            )
    for item_id in (*hwrq_ids, *tc_ids, *waiver_ids):
        store.set_review_state(item_id, "in_review")
        store.set_review_state(item_id, "approved")


def build_superset() -> RmtStore:
    store = RmtStore()
    install_superset(store)
    return store
