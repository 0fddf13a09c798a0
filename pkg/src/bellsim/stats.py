"""Estimators over run logs: coincidence counts, correlators, CHSH and CH
parameters, and the two-curve angle scan.

Each setting pair is measured on its own slots (no slot carries two settings
at one station), so the Bell parameters below are the standard experimental
estimators: every sum is taken over its own pairing's slots and normalized
by that pairing's measured count.  Slots where a station had no detection
(outcome 0) are excluded from correlator denominators and reported apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .engine import A_LABELS, B_LABELS, RunConfig, RunLog, SettingsSchedule, run
from .model import PairSourceConfig

PAIRINGS = tuple((a, b) for a in A_LABELS for b in B_LABELS)

CHSH_PAIRINGS = (
    (A_LABELS[0], B_LABELS[0]),
    (A_LABELS[0], B_LABELS[1]),
    (A_LABELS[1], B_LABELS[0]),
    (A_LABELS[1], B_LABELS[1]),
)


@dataclass(frozen=True)
class CoincidenceCounts:
    """Joint outcome tallies for one setting pair."""

    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    n_zero: int  # slots with at least one outcome 0
    n_total: int

    @property
    def n_coincident(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm


def count_coincidences(log: RunLog) -> dict[tuple[str, str], CoincidenceCounts]:
    """Tally joint outcomes per setting pair actually applied."""
    sched = log.config.schedule
    out = {}
    for ia, la in enumerate(A_LABELS):
        for ib, lb in enumerate(B_LABELS):
            mask = (sched.choice_a == ia) & (sched.choice_b == ib)
            n_total = int(mask.sum())
            if n_total == 0:
                continue
            a = log.outcome_a[mask]
            b = log.outcome_b[mask]
            zero = (a == 0) | (b == 0)
            out[(la, lb)] = CoincidenceCounts(
                n_pp=int(np.sum((a == 1) & (b == 1))),
                n_pm=int(np.sum((a == 1) & (b == -1))),
                n_mp=int(np.sum((a == -1) & (b == 1))),
                n_mm=int(np.sum((a == -1) & (b == -1))),
                n_zero=int(np.sum(zero)),
                n_total=n_total,
            )
    return out


def correlator(counts: CoincidenceCounts) -> float:
    """E = (N++ + N-- - N+- - N-+) / (coincident detections)."""
    denom = counts.n_coincident
    if denom == 0:
        raise ValueError("correlator undefined: no coincident detections in this pairing")
    return (counts.n_pp + counts.n_mm - counts.n_pm - counts.n_mp) / denom


@dataclass(frozen=True)
class ChshResult:
    e: dict[tuple[str, str], float]
    s: float
    counts: dict[tuple[str, str], CoincidenceCounts]


def chsh(log: RunLog, angles: tuple[float, float, float, float] | None = None) -> ChshResult:
    """CHSH parameter from the four per-pairing correlators.

    S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|.  `angles` is accepted for
    interface symmetry; the estimator needs only the setting labels.
    """
    counts = count_coincidences(log)
    missing = [p for p in CHSH_PAIRINGS if p not in counts]
    if missing:
        raise ValueError(f"setting pairs missing from log: {missing}")
    e = {p: correlator(counts[p]) for p in CHSH_PAIRINGS}
    ab, abp, apb, apbp = (e[p] for p in CHSH_PAIRINGS)
    s = abs(ab - abp) + abs(apb + apbp)
    return ChshResult(e=e, s=s, counts=counts)


@dataclass(frozen=True)
class ChResult:
    j: float
    p_joint: dict[tuple[str, str], float]  # per-pairing P(+1, +1)
    p_single_a: float  # P(+1) at A with setting alpha
    p_single_b: float  # P(+1) at B with setting beta


def ch(log: RunLog, angles: tuple[float, float, float, float] | None = None) -> ChResult:
    """CH parameter using only the +1 detectors (outcomes re-encoded to 0/1).

    J = P(a,b) + P(a,b') + P(a',b) - P(a',b') - P(a) - P(b), every term an
    empirical frequency over its own pairing's measured slots (outcome 0
    counts as "no +1 detection", not as a missing slot).
    """
    sched = log.config.schedule
    counts = count_coincidences(log)
    missing = [p for p in CHSH_PAIRINGS if p not in counts]
    if missing:
        raise ValueError(f"setting pairs missing from log: {missing}")
    p_joint = {p: counts[p].n_pp / counts[p].n_total for p in CHSH_PAIRINGS}
    mask_a = sched.choice_a == 0
    mask_b = sched.choice_b == 0
    p_a = float(np.sum(log.outcome_a[mask_a] == 1) / mask_a.sum())
    p_b = float(np.sum(log.outcome_b[mask_b] == 1) / mask_b.sum())
    ab, abp, apb, apbp = (p_joint[p] for p in CHSH_PAIRINGS)
    j = ab + abp + apb - apbp - p_a - p_b
    return ChResult(j=j, p_joint=p_joint, p_single_a=p_a, p_single_b=p_b)


def singles_plus_fraction(log: RunLog, station: str) -> tuple[float, int]:
    """Share of +1 among a station's detections, with the detection count."""
    out = log.outcome_a if station.upper() == "A" else log.outcome_b
    detections = int(np.sum(out != 0))
    if detections == 0:
        raise ValueError(f"station {station}: no detections")
    return float(np.sum(out == 1) / detections), detections


@dataclass(frozen=True)
class ScanPoint:
    delta: float
    rate_on: float  # N++ / N with the contextual rule
    rate_off: float  # N++ / N without it


def _child_seed(base_seed: int, *path: int) -> int:
    state = np.random.SeedSequence((base_seed, *path)).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def coincidence_rate_pp(log: RunLog) -> float:
    """N++ over all slots of the run (single-pairing runs)."""
    return float(np.sum((log.outcome_a == 1) & (log.outcome_b == 1)) / log.n_slots)


def curve_scan(base_config: RunConfig, deltas) -> list[ScanPoint]:
    """Coincidence-rate curve N++/N versus analyzer angle difference.

    For each difference the engine runs twice, with and without the
    contextual rule, on fresh seeds derived deterministically from the base
    config's seed.  Points come back ordered by input position.
    """
    deltas = list(deltas)
    if not deltas:
        raise ValueError("deltas must be non-empty")
    points = []
    for i, delta in enumerate(deltas):
        rates = {}
        for flag, contextual in ((0, True), (1, False)):
            config = replace(
                base_config,
                angles=(float(delta), float(delta), 0.0, 0.0),
                schedule=SettingsSchedule.constant(base_config.n_slots),
                contextual=contextual,
                source=replace(
                    base_config.source, seed=_child_seed(base_config.source.seed, i, flag)
                ),
            )
            rates[contextual] = coincidence_rate_pp(run(config))
        points.append(ScanPoint(delta=float(delta), rate_on=rates[True], rate_off=rates[False]))
    return points


def default_scan_config(
    n_slots: int, seed: int, threshold_u: float = 1.0
) -> RunConfig:
    """Convenience base config for curve_scan."""
    return RunConfig(
        n_slots=n_slots,
        angles=(0.0, 0.0, 0.0, 0.0),
        threshold_u=threshold_u,
        source=PairSourceConfig(seed=seed),
        schedule=SettingsSchedule.constant(n_slots),
    )
