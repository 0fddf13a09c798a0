"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from bellsim import (
    PairSourceConfig,
    RunConfig,
    RunLog,
    SettingsSchedule,
)

CHSH_ANGLES = (0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)
# CH's odd pairing is (alpha', beta'), so the anti-correlated setting pair of
# the optimal set goes there: swap which A setting is primed.
CH_ANGLES = (math.pi / 4, 0.0, math.pi / 8, 3 * math.pi / 8)


def make_config(
    n_slots: int,
    seed: int = 1,
    angles=CHSH_ANGLES,
    schedule: SettingsSchedule | str = "block",
    contextual: bool = True,
    threshold_u: float = 1.0,
    role_policy=None,
) -> RunConfig:
    if schedule == "block":
        schedule = SettingsSchedule.block(n_slots)
    elif schedule == "constant":
        schedule = SettingsSchedule.constant(n_slots)
    kwargs = {}
    if role_policy is not None:
        kwargs["role_policy"] = role_policy
    return RunConfig(
        n_slots=n_slots,
        angles=angles,
        threshold_u=threshold_u,
        source=PairSourceConfig(seed=seed),
        schedule=schedule,
        contextual=contextual,
        **kwargs,
    )


def block_log_from_pairs(quarter_pairs, angles=CHSH_ANGLES) -> RunLog:
    """Build a block-schedule log from four lists of (A, B) outcome pairs.

    quarter_pairs follows the block order (a,b'), (a,b), (a',b), (a',b').
    """
    sizes = {len(q) for q in quarter_pairs}
    if len(quarter_pairs) != 4 or len(sizes) != 1:
        raise ValueError("need four equal-length quarters")
    n = 4 * len(quarter_pairs[0])
    out_a = np.array([p[0] for q in quarter_pairs for p in q], dtype=np.int8)
    out_b = np.array([p[1] for q in quarter_pairs for p in q], dtype=np.int8)
    config = RunConfig(
        n_slots=n,
        angles=angles,
        threshold_u=1.0,
        source=PairSourceConfig(seed=0),
        schedule=SettingsSchedule.block(n),
    )
    return RunLog(config=config, outcome_a=out_a, outcome_b=out_b, hv_trace=None)


# Full four-row table on a shared index, as printed in the condensation
# walk-through: rows a, b, a', b' over four columns.
CONDENSED_REFERENCE_ROWS = np.array(
    [
        [-1, 1, -1, 1],
        [-1, 1, -1, 1],
        [-1, 1, 1, -1],
        [1, -1, 1, -1],
    ],
    dtype=np.int8,
)


def reference_block_pairs():
    """The 16-slot block table obtained by expanding the reference condensed
    table: each quarter holds that setting pair's columns in table order."""
    a, b, ap, bp = CONDENSED_REFERENCE_ROWS
    return [
        list(zip(a, bp)),
        list(zip(a, b)),
        list(zip(ap, b)),
        list(zip(ap, bp)),
    ]


def s4_block_pairs():
    """An 8-slot block table with S = 4 (two slots per setting pair); its
    series cannot be legitimately reordered into a full table."""
    return [
        [(-1, 1), (1, -1)],
        [(-1, -1), (1, 1)],
        [(-1, -1), (1, 1)],
        [(-1, -1), (1, 1)],
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
