"""Outcome tables with empty boxes, correlation-preserving condensation, and
executable checks of the arithmetic Bell bounds.

A block-schedule run yields a four-row table (a, b, a', b') in which every
column holds exactly one A-row and one B-row outcome; the other cells are
empty boxes (settings never applied, distinct from outcome 0).  Condensing
the table means reordering columns within each setting-pair block, moving
simultaneous pairs together so no correlation changes, until each station's
series under one remote setting equals its series under the other.  When
that succeeds the four series are jointly defined on a common index and the
CHSH/CH bounds hold identically; when the observed correlations violate a
bound, no such reordering exists.

Feasibility is decided exactly by counting: a legitimate reordering exists
iff the sixteen joint column types (a, b, a', b') in {+1,-1}^4 can be given
non-negative integer multiplicities whose four pairwise projections equal
the observed per-block count matrices.  Gluing the two station-A blocks
gives a one-parameter family of (b, b') joints, likewise for station B, and
the problem reduces to intersecting two integer intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import RunLog

ROW_LABELS = ("a", "b", "a'", "b'")

EMPTY = np.int8(-128)  # setting not applied: no outcome at all
_CELL_VALUES = (1, -1, 0)

# block index -> (A-row, B-row) of the pairing, in schedule order
_BLOCK_ROWS = ((0, 3), (0, 1), (2, 1), (2, 3))
_BLOCK_NAMES = ("(a,b')", "(a,b)", "(a',b)", "(a',b')")


def _value_index(v: int) -> int:
    return 0 if v == 1 else 1


def _index_value(i: int) -> int:
    return 1 if i == 0 else -1


@dataclass(frozen=True)
class OutcomeTable:
    """Four outcome rows over N time slots, with empty boxes.

    cells[r, t] is +1/-1/0 for a performed measurement, EMPTY otherwise.
    Row order: a, b, a', b'.
    """

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.ndim != 2 or cells.shape[0] != 4:
            raise ValueError("table must have four rows")
        valid = np.isin(cells, _CELL_VALUES) | (cells == EMPTY)
        if not valid.all():
            raise ValueError("cells must be +1, -1, 0 or EMPTY")
        a_filled = (cells[0] != EMPTY).astype(int) + (cells[2] != EMPTY).astype(int)
        b_filled = (cells[1] != EMPTY).astype(int) + (cells[3] != EMPTY).astype(int)
        if not (np.all(a_filled == 1) and np.all(b_filled == 1)):
            raise ValueError(
                "every column needs exactly one of a/a' and one of b/b' filled"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n_slots(self) -> int:
        return int(self.cells.shape[1])


@dataclass(frozen=True)
class CondensedTable:
    """Four full +-1 rows on a common index (no empty boxes).

    Condensing a block table of N slots yields M = N/4 columns: each row,
    defined on half the slots, halves again when its two duplicate blocks
    merge.
    """

    cells: np.ndarray
    dropped_zero_slots: int = 0

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.ndim != 2 or cells.shape[0] != 4:
            raise ValueError("condensed table must have four rows")
        if not np.isin(cells, (1, -1)).all():
            raise ValueError("condensed cells must be +1 or -1")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n_columns(self) -> int:
        return int(self.cells.shape[1])


@dataclass(frozen=True)
class Infeasible:
    """Witness that no legitimate reordering exists."""

    witness: str
    dropped_zero_slots: int = 0


@dataclass(frozen=True)
class PairCountMatrix:
    """2x2 joint +-1 counts for each of the four setting pairs.

    Index 0 means +1, index 1 means -1; matrices[k][i, j] counts columns of
    block k with A-outcome i and B-outcome j.  Block order: (a,b'), (a,b),
    (a',b), (a',b').
    """

    matrices: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=np.int64) for m in self.matrices)
        for m in mats:
            if m.shape != (2, 2) or (m < 0).any():
                raise ValueError("each count matrix must be 2x2 and non-negative")
        object.__setattr__(self, "matrices", mats)

    @property
    def totals(self) -> tuple[int, int, int, int]:
        return tuple(int(m.sum()) for m in self.matrices)

    @classmethod
    def from_pairs(cls, blocks) -> "PairCountMatrix":
        """blocks: four iterables of (A-outcome, B-outcome) +-1 pairs."""
        mats = []
        for pairs in blocks:
            m = np.zeros((2, 2), dtype=np.int64)
            for va, vb in pairs:
                m[_value_index(int(va)), _value_index(int(vb))] += 1
            mats.append(m)
        return cls(tuple(mats))

    @classmethod
    def from_table(cls, table: OutcomeTable) -> tuple["PairCountMatrix", int]:
        """Count pairs per block, dropping columns that contain outcome 0.

        Returns (counts, dropped_zero_columns).
        """
        cells = table.cells
        blocks = [[] for _ in range(4)]
        dropped = 0
        for t in range(table.n_slots):
            col = cells[:, t]
            ra = 0 if col[0] != EMPTY else 2
            rb = 1 if col[1] != EMPTY else 3
            va, vb = int(col[ra]), int(col[rb])
            if va == 0 or vb == 0:
                dropped += 1
                continue
            k = _BLOCK_ROWS.index((ra, rb))
            blocks[k].append((va, vb))
        return cls.from_pairs(blocks), dropped

    @classmethod
    def from_log(cls, log: RunLog) -> tuple["PairCountMatrix", int]:
        """Count pairs per setting pair of any log (random switching included)."""
        sched = log.config.schedule
        blocks = []
        dropped = 0
        # schedule choice -> block, matching _BLOCK_ROWS order
        for ia, ib in ((0, 1), (0, 0), (1, 0), (1, 1)):
            mask = (sched.choice_a == ia) & (sched.choice_b == ib)
            a = log.outcome_a[mask]
            b = log.outcome_b[mask]
            keep = (a != 0) & (b != 0)
            dropped += int(np.sum(~keep))
            blocks.append(list(zip(a[keep].tolist(), b[keep].tolist())))
        return cls.from_pairs(blocks), dropped


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    joint: np.ndarray | None  # 2x2x2x2 counts over (a, b, a', b') value indices
    witness: str | None


def _row_sums(m: np.ndarray) -> np.ndarray:
    return m.sum(axis=1)


def _col_sums(m: np.ndarray) -> np.ndarray:
    return m.sum(axis=0)


def _glue_interval(rows: np.ndarray, cols: np.ndarray) -> tuple[int, int]:
    """Integer range of table[0, 0] for a 2x2 table with given row/col sums."""
    total = int(rows.sum())
    lo = max(0, int(rows[0]) + int(cols[0]) - total)
    hi = min(int(rows[0]), int(cols[0]))
    return lo, hi


def feasibility_by_counts(counts: PairCountMatrix) -> FeasibilityResult:
    """Decide whether a joint column-type assignment reproduces all four
    observed pair-count matrices; construct one when it exists.

    The witness on failure names the first margin identity that cannot be
    satisfied, so the impossibility can be audited by hand.
    """
    c_abp, c_ab, c_apb, c_apbp = counts.matrices
    totals = counts.totals
    if len(set(totals)) != 1:
        raise ValueError(f"blocks have unequal totals {totals}; cannot compare series")

    # Singleton margins must agree wherever a series appears twice.
    checks = (
        ("a", _row_sums(c_ab), "(a,b)", _row_sums(c_abp), "(a,b')"),
        ("a'", _row_sums(c_apb), "(a',b)", _row_sums(c_apbp), "(a',b')"),
        ("b", _col_sums(c_ab), "(a,b)", _col_sums(c_apb), "(a',b)"),
        ("b'", _col_sums(c_abp), "(a,b')", _col_sums(c_apbp), "(a',b')"),
    )
    for name, m1, b1, m2, b2 in checks:
        if not np.array_equal(m1, m2):
            return FeasibilityResult(
                feasible=False,
                joint=None,
                witness=(
                    f"series {name} has {int(m1[0])} outcomes +1 in block {b1} "
                    f"but {int(m2[0])} in block {b2}; no reordering changes a "
                    f"series' composition"
                ),
            )

    # Station-A gluing: for each a value x, the (b, b') joint given a=x is a
    # 2x2 table with row sums c_ab[x, :] and column sums c_abp[x, :], free in
    # one integer.  N(b=+1, b'=+1) then ranges over an interval; same from
    # the station-B side via a'.
    ints_a = [_glue_interval(c_ab[x, :], c_abp[x, :]) for x in (0, 1)]
    ints_b = [_glue_interval(c_apb[x, :], c_apbp[x, :]) for x in (0, 1)]
    lo_a = ints_a[0][0] + ints_a[1][0]
    hi_a = ints_a[0][1] + ints_a[1][1]
    lo_b = ints_b[0][0] + ints_b[1][0]
    hi_b = ints_b[0][1] + ints_b[1][1]
    lo = max(lo_a, lo_b)
    hi = min(hi_a, hi_b)
    if lo > hi:
        return FeasibilityResult(
            feasible=False,
            joint=None,
            witness=(
                f"the joint count N(b=+1, b'=+1) is overconstrained: blocks "
                f"(a,b) and (a,b') force it into [{lo_a}, {hi_a}] while blocks "
                f"(a',b) and (a',b') force it into [{lo_b}, {hi_b}], and the "
                f"intervals do not overlap"
            ),
        )

    q_pp = lo  # deterministic representative
    taus = _split(q_pp, ints_a)
    sigmas = _split(q_pp, ints_b)
    t_tabs = [_fill_2x2(c_ab[x, :], c_abp[x, :], taus[x]) for x in (0, 1)]
    s_tabs = [_fill_2x2(c_apb[x, :], c_apbp[x, :], sigmas[x]) for x in (0, 1)]

    joint = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for y in (0, 1):
        for w in (0, 1):
            rows = np.array([t_tabs[0][y, w], t_tabs[1][y, w]])
            cols = np.array([s_tabs[0][y, w], s_tabs[1][y, w]])
            if rows.sum() != cols.sum():  # pragma: no cover - construction bug
                raise AssertionError("gluing produced inconsistent (b, b') joints")
            n00 = min(int(rows[0]), int(cols[0]))
            joint[0, y, 0, w] = n00
            joint[0, y, 1, w] = int(rows[0]) - n00
            joint[1, y, 0, w] = int(cols[0]) - n00
            joint[1, y, 1, w] = int(rows[1]) - (int(cols[0]) - n00)

    _check_joint(joint, counts)
    return FeasibilityResult(feasible=True, joint=joint, witness=None)


def _split(total: int, intervals) -> tuple[int, int]:
    """Split `total` into two integers lying in the given intervals."""
    (l0, u0), (l1, u1) = intervals
    x0 = min(u0, total - l1)
    x1 = total - x0
    if not (l0 <= x0 <= u0 and l1 <= x1 <= u1):  # pragma: no cover
        raise AssertionError("interval split failed")
    return x0, x1


def _fill_2x2(rows: np.ndarray, cols: np.ndarray, corner: int) -> np.ndarray:
    t = np.empty((2, 2), dtype=np.int64)
    t[0, 0] = corner
    t[0, 1] = int(rows[0]) - corner
    t[1, 0] = int(cols[0]) - corner
    t[1, 1] = int(rows[1]) - t[1, 0]
    if (t < 0).any():  # pragma: no cover - interval arithmetic bug
        raise AssertionError("negative cell in glued table")
    return t


def _check_joint(joint: np.ndarray, counts: PairCountMatrix) -> None:
    c_abp, c_ab, c_apb, c_apbp = counts.matrices
    # axis bookkeeping: joint[a, b, a', b']
    ok = (
        np.array_equal(joint.sum(axis=(2, 3)), c_ab)
        and np.array_equal(joint.sum(axis=(1, 2)), c_abp)
        and np.array_equal(joint.sum(axis=(0, 3)), c_apb)
        and np.array_equal(joint.sum(axis=(0, 1)), c_apbp)
    )
    if not ok:  # pragma: no cover - construction bug
        raise AssertionError("constructed joint does not reproduce the margins")


def build_table(log: RunLog) -> OutcomeTable:
    """Lay out a block-schedule log as a four-row table with empty boxes."""
    sched = log.config.schedule
    if not sched.quarter_blocks():
        raise ValueError(
            "build_table needs the four-quarter block schedule; summarize "
            "random-switching logs with PairCountMatrix.from_log instead"
        )
    n = log.n_slots
    cells = np.full((4, n), EMPTY, dtype=np.int8)
    a_row = np.where(sched.choice_a == 0, 0, 2)
    b_row = np.where(sched.choice_b == 0, 1, 3)
    cols = np.arange(n)
    cells[a_row, cols] = log.outcome_a
    cells[b_row, cols] = log.outcome_b
    return OutcomeTable(cells)


def condense(table: OutcomeTable) -> CondensedTable | Infeasible:
    """Condense a table by legitimate reordering, or explain why it cannot be.

    Columns containing outcome 0 are dropped first (the +-1 bound arithmetic
    needs binary outcomes); the count of dropped slots is reported on the
    result.  Success returns the condensed table with a deterministic column
    order; the correlations of every setting pair are preserved exactly.
    """
    counts, dropped = PairCountMatrix.from_table(table)
    totals = counts.totals
    if len(set(totals)) != 1:
        return Infeasible(
            witness=(
                f"setting-pair blocks have unequal lengths {totals} after "
                f"dropping {dropped} zero-outcome slots; series of different "
                f"lengths cannot be made equal element by element"
            ),
            dropped_zero_slots=dropped,
        )
    result = feasibility_by_counts(counts)
    if not result.feasible:
        return Infeasible(witness=result.witness, dropped_zero_slots=dropped)
    cols = []
    joint = result.joint
    for ia in (0, 1):
        for ib in (0, 1):
            for iap in (0, 1):
                for ibp in (0, 1):
                    reps = int(joint[ia, ib, iap, ibp])
                    if reps:
                        col = (
                            _index_value(ia),
                            _index_value(ib),
                            _index_value(iap),
                            _index_value(ibp),
                        )
                        cols.extend([col] * reps)
    cells = np.array(cols, dtype=np.int8).T if cols else np.empty((4, 0), dtype=np.int8)
    return CondensedTable(cells=cells, dropped_zero_slots=dropped)


def verify_chsh_bound(table: CondensedTable) -> float:
    """CHSH on a full table via the shared-index sums; certify S <= 2.

    Also checks the per-column certificate |b - b'| + |b + b'| = 2 that makes
    the bound an arithmetic identity.  A violation raises: it cannot happen
    for +-1 series and would signal a table-construction defect.
    """
    a, b, ap, bp = (table.cells[r].astype(np.int64) for r in range(4))
    m = table.n_columns
    if m == 0:
        raise ValueError("empty table has no CHSH value")
    cert = np.abs(b - bp) + np.abs(b + bp)
    if not np.all(cert == 2):  # pragma: no cover - unreachable for +-1 cells
        raise AssertionError("per-column certificate |b-b'| + |b+b'| = 2 failed")
    numerator = abs(int(np.sum(a * b)) - int(np.sum(a * bp))) + abs(
        int(np.sum(ap * b)) + int(np.sum(ap * bp))
    )
    if numerator > 2 * m:  # pragma: no cover - unreachable for +-1 cells
        raise AssertionError("CHSH bound S <= 2 failed on a full table")
    return numerator / m


def verify_ch_bound(table: CondensedTable) -> float:
    """CH on a full table with rows re-encoded to 0/1; certify J <= 0.

    Every column term a(b + b') + a'(b - b') - a - b is individually <= 0
    for 0/1 values; a violation raises as a defect signal.
    """
    if table.n_columns == 0:
        raise ValueError("empty table has no CH value")
    a, b, ap, bp = ((table.cells[r] == 1).astype(np.int64) for r in range(4))
    terms = a * (b + bp) + ap * (b - bp) - a - b
    if not np.all(terms <= 0):  # pragma: no cover - unreachable for 0/1 cells
        raise AssertionError("per-column CH term > 0 on a full table")
    return float(terms.sum())


def sica_locality_diff(original: RunLog, replay: RunLog) -> list[int]:
    """Slots (1-based) where the station whose setting did not change got a
    different outcome in the replay.

    Both logs must carry the same hidden history (trace and initial
    memories) and run parameters; exactly one station's applied settings may
    differ.  An empty list certifies that the unchanged station's series
    survived the remote setting change.
    """
    if original.hv_trace is None or replay.hv_trace is None:
        raise ValueError("both logs need hv traces to be compared")
    t1, t2 = original.hv_trace, replay.hv_trace
    if not (
        np.array_equal(t1.angles, t2.angles)
        and np.array_equal(t1.moduli, t2.moduli)
        and np.array_equal(t1.initial_memories, t2.initial_memories)
    ):
        raise ValueError("logs do not share a hidden history; not replay-compatible")
    c1, c2 = original.config, replay.config
    if (
        c1.n_slots != c2.n_slots
        or c1.threshold_u != c2.threshold_u
        or c1.contextual != c2.contextual
        or not np.array_equal(
            c1.role_policy.master_is_b(c1.n_slots), c2.role_policy.master_is_b(c2.n_slots)
        )
    ):
        raise ValueError("run parameters differ beyond the analyzer settings")
    set_a1, set_b1 = original.applied_settings()
    set_a2, set_b2 = replay.applied_settings()
    a_changed = not np.array_equal(set_a1, set_a2)
    b_changed = not np.array_equal(set_b1, set_b2)
    if a_changed and b_changed:
        raise ValueError("both stations' settings changed; no station was held fixed")
    if a_changed:
        diff = original.outcome_b != replay.outcome_b
    elif b_changed:
        diff = original.outcome_a != replay.outcome_a
    else:
        diff = (original.outcome_a != replay.outcome_a) | (
            original.outcome_b != replay.outcome_b
        )
    return [int(i) + 1 for i in np.flatnonzero(diff)]
