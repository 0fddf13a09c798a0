"""Run loop for the two-station experiment.

Each time slot: the source emits a pair (equal hidden vectors), the leading
("master") station measures first, and — when the contextual rule is on and
the master detected something — the other station's vector is replaced by a
vector of the original modulus along the fired gate axis before it is
measured.  Everything is a pure function of the RunConfig, including the
seed, so identical configs give identical logs.

The per-slot hidden-variable stream and the initial gate memories are kept
with the log, which makes counterfactual replays exact: the same hidden
history can be re-measured under different settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .model import PairSourceConfig, reduce_axis_angle

A_LABELS = ("alpha", "alpha'")
B_LABELS = ("beta", "beta'")

# Initial gate accumulators: both "+1" gates start at g = u * fraction, both
# "-1" gates at u - g.  The per-station sum must be an exact multiple of u
# (it is conserved by the deposit rule) or a permanent fraction of slots
# yields no detection; equal "+1" phases across stations keep the
# instruction-off coincidence rate at the quantum value for parallel
# analyzers.  The fraction must be positive (a zero/half offset makes both
# gates of a station fire simultaneously forever at 45-degree differences)
# and small (the instruction-off rate at orthogonal analyzers is ~2x this).
GATE_PHASE_FRACTION_LO = 1e-4
GATE_PHASE_FRACTION_HI = 1e-3


def derive_streams(seed) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Child generators for (initial memories, schedule, source), in that order."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


class SettingsSchedule:
    """Per-slot choice of analyzer setting at each station.

    choice_a[t] = 0 selects alpha, 1 selects alpha'; likewise choice_b for
    beta/beta'.  Slots are 1-based in records; arrays are 0-based.
    """

    def __init__(self, choice_a: np.ndarray, choice_b: np.ndarray, kind: str = "custom"):
        choice_a = np.ascontiguousarray(choice_a, dtype=np.uint8)
        choice_b = np.ascontiguousarray(choice_b, dtype=np.uint8)
        if choice_a.ndim != 1 or choice_a.shape != choice_b.shape:
            raise ValueError("choice arrays must be 1-d and of equal length")
        if choice_a.size == 0:
            raise ValueError("schedule must cover at least one slot")
        for arr in (choice_a, choice_b):
            if arr.max(initial=0) > 1:
                raise ValueError("setting choices must be 0 or 1")
        choice_a.setflags(write=False)
        choice_b.setflags(write=False)
        self.choice_a = choice_a
        self.choice_b = choice_b
        self.kind = kind

    def __len__(self) -> int:
        return int(self.choice_a.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SettingsSchedule)
            and np.array_equal(self.choice_a, other.choice_a)
            and np.array_equal(self.choice_b, other.choice_b)
        )

    # The block layout runs the four setting pairs in contiguous quarters:
    # (alpha, beta'), (alpha, beta), (alpha', beta), (alpha', beta').
    BLOCK_QUARTERS = ((0, 1), (0, 0), (1, 0), (1, 1))

    @classmethod
    def block(cls, n_slots: int) -> "SettingsSchedule":
        """Four equal contiguous quarters covering all setting pairs."""
        if n_slots % 4 != 0:
            raise ValueError(f"block schedule needs n_slots divisible by 4, got {n_slots}")
        q = n_slots // 4
        ca = np.repeat([p[0] for p in cls.BLOCK_QUARTERS], q)
        cb = np.repeat([p[1] for p in cls.BLOCK_QUARTERS], q)
        return cls(ca, cb, kind="block")

    @classmethod
    def random_switching(cls, n_slots: int, rng: np.random.Generator) -> "SettingsSchedule":
        """Independent fair per-slot switching at both stations."""
        if n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        ca = rng.integers(0, 2, size=n_slots, dtype=np.uint8)
        cb = rng.integers(0, 2, size=n_slots, dtype=np.uint8)
        return cls(ca, cb, kind="random")

    @classmethod
    def constant(cls, n_slots: int, choice_a: int = 0, choice_b: int = 0) -> "SettingsSchedule":
        """Single setting pair for the whole run (angle-scan runs)."""
        if n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        ca = np.full(n_slots, choice_a, dtype=np.uint8)
        cb = np.full(n_slots, choice_b, dtype=np.uint8)
        return cls(ca, cb, kind="constant")

    def quarter_blocks(self) -> bool:
        """True when the schedule is the canonical four-quarter block layout."""
        n = len(self)
        if n % 4 != 0:
            return False
        q = n // 4
        for i, (pa, pb) in enumerate(self.BLOCK_QUARTERS):
            sl = slice(i * q, (i + 1) * q)
            if not (np.all(self.choice_a[sl] == pa) and np.all(self.choice_b[sl] == pb)):
                return False
        return True


@dataclass(frozen=True)
class RolePolicy:
    """Which station measures first (the collapse source) in each slot.

    kinds: "fixed_a", "fixed_b", "switch" (flip at the listed 1-based slots),
    "geometry" (derive the fixed leader from light-cone entry times).
    """

    kind: str
    switch_slots: tuple[int, ...] = ()
    geometry: "StationGeometry | None" = None

    @classmethod
    def fixed_a(cls) -> "RolePolicy":
        return cls("fixed_a")

    @classmethod
    def fixed_b(cls) -> "RolePolicy":
        return cls("fixed_b")

    @classmethod
    def switch_at(cls, slots) -> "RolePolicy":
        return cls("switch", switch_slots=tuple(int(s) for s in slots))

    @classmethod
    def from_geometry(cls, geometry: "StationGeometry") -> "RolePolicy":
        return cls("geometry", geometry=geometry)

    def master_is_b(self, n_slots: int) -> np.ndarray:
        if self.kind == "fixed_a":
            return np.zeros(n_slots, dtype=np.uint8)
        if self.kind == "fixed_b":
            return np.ones(n_slots, dtype=np.uint8)
        if self.kind == "switch":
            slots = self.switch_slots
            if any(s2 <= s1 for s1, s2 in zip(slots, slots[1:])):
                raise ValueError("switch slots must be strictly increasing")
            if slots and (slots[0] < 1 or slots[-1] > n_slots):
                raise ValueError("switch slots must lie within 1..n_slots")
            flips = np.searchsorted(np.asarray(slots, dtype=np.int64), np.arange(1, n_slots + 1), side="right")
            return (flips % 2).astype(np.uint8)
        if self.kind == "geometry":
            if self.geometry is None:
                raise ValueError("geometry role policy needs a StationGeometry")
            assignment = assign_roles(self.geometry)
            return (
                np.ones(n_slots, dtype=np.uint8)
                if assignment.master == "B"
                else np.zeros(n_slots, dtype=np.uint8)
            )
        raise ValueError(f"unknown role policy kind: {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one run; the one input of `run`."""

    n_slots: int
    angles: tuple[float, float, float, float]  # alpha, alpha', beta, beta'
    threshold_u: float
    source: PairSourceConfig
    schedule: SettingsSchedule
    contextual: bool = True
    role_policy: RolePolicy = field(default_factory=RolePolicy.fixed_a)

    def __post_init__(self):
        if self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        if not self.threshold_u > 0.0:
            raise ValueError(f"threshold_u must be > 0, got {self.threshold_u}")
        if len(self.angles) != 4 or not all(math.isfinite(a) for a in self.angles):
            raise ValueError("angles must be four finite radian values")
        object.__setattr__(self, "angles", tuple(reduce_axis_angle(a) for a in self.angles))
        if len(self.schedule) != self.n_slots:
            raise ValueError(
                f"schedule length {len(self.schedule)} != n_slots {self.n_slots}"
            )


@dataclass(frozen=True)
class SlotRecord:
    """One time slot: applied settings (radians) and outcomes (+1/-1/0).

    Outcome 0 means the measurement happened but no detector fired; it is
    not the same as a setting that was never applied.
    """

    slot: int
    setting_a: float
    setting_b: float
    outcome_a: int
    outcome_b: int


@dataclass(frozen=True)
class HvTrace:
    """Recorded hidden history: per-slot pair vectors plus initial memories."""

    angles: np.ndarray  # per-slot shared axis angle of the emitted pair
    moduli: np.ndarray  # per-slot shared modulus
    initial_memories: np.ndarray  # A+, A-, B+, B- accumulators at slot 1

    def __post_init__(self):
        for arr in (self.angles, self.moduli, self.initial_memories):
            arr.setflags(write=False)


@dataclass(frozen=True)
class RunLog:
    """Outcome series of one run, with enough context to replay it."""

    config: RunConfig
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    hv_trace: HvTrace | None

    def __post_init__(self):
        self.outcome_a.setflags(write=False)
        self.outcome_b.setflags(write=False)

    @property
    def n_slots(self) -> int:
        return self.config.n_slots

    def applied_settings(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-slot analyzer angles actually used at A and B."""
        alpha, alpha_p, beta, beta_p = self.config.angles
        sched = self.config.schedule
        set_a = np.where(sched.choice_a == 0, alpha, alpha_p)
        set_b = np.where(sched.choice_b == 0, beta, beta_p)
        return set_a, set_b

    def records(self) -> list[SlotRecord]:
        set_a, set_b = self.applied_settings()
        return [
            SlotRecord(t + 1, float(set_a[t]), float(set_b[t]), int(self.outcome_a[t]), int(self.outcome_b[t]))
            for t in range(self.n_slots)
        ]


def initial_memories(u: float, rng: np.random.Generator) -> np.ndarray:
    """Draw the four initial gate accumulators (A+, A-, B+, B-) for a run."""
    g = u * rng.uniform(GATE_PHASE_FRACTION_LO, GATE_PHASE_FRACTION_HI)
    return np.array([g, u - g, g, u - g], dtype=np.float64)


def _emit_stream(config: RunConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-slot pair vectors for a whole run (bulk form of emit_pair)."""
    n = config.n_slots
    angles = rng.uniform(0.0, math.pi, n)
    value = config.source.modulus
    if value is None:
        value = math.sqrt(config.threshold_u)
    moduli = np.full(n, value, dtype=np.float64)
    return angles, moduli


def _simulate(config: RunConfig, trace: HvTrace) -> RunLog:
    n = config.n_slots
    alpha, alpha_p, beta, beta_p = config.angles
    sched = config.schedule
    set_a = np.ascontiguousarray(np.where(sched.choice_a == 0, alpha, alpha_p))
    set_b = np.ascontiguousarray(np.where(sched.choice_b == 0, beta, beta_p))
    master_is_b = np.ascontiguousarray(config.role_policy.master_is_b(n))
    out_a = np.empty(n, dtype=np.int8)
    out_b = np.empty(n, dtype=np.int8)
    backend.simulate_slots(
        np.ascontiguousarray(trace.angles),
        np.ascontiguousarray(trace.moduli),
        set_a,
        set_b,
        master_is_b,
        float(config.threshold_u),
        bool(config.contextual),
        np.ascontiguousarray(trace.initial_memories),
        out_a,
        out_b,
    )
    return RunLog(config=config, outcome_a=out_a, outcome_b=out_b, hv_trace=trace)


def run(config: RunConfig) -> RunLog:
    """Run the experiment described by `config`.

    Deterministic: the hidden-variable stream, schedule and initial memories
    all derive from config.source.seed via fixed child streams.
    """
    mem_rng, _sched_rng, src_rng = derive_streams(config.source.seed)
    mem0 = initial_memories(config.threshold_u, mem_rng)
    hv_angles, hv_moduli = _emit_stream(config, src_rng)
    trace = HvTrace(angles=hv_angles, moduli=hv_moduli, initial_memories=mem0)
    return _simulate(config, trace)


def counterfactual_replay(
    log: RunLog,
    alt_angles: tuple[float, float, float, float],
    alt_schedule: SettingsSchedule | None = None,
) -> RunLog:
    """Re-measure a recorded hidden history under different settings.

    Consumes the log's hv trace and initial memories verbatim; only the
    analyzer angles (and optionally the schedule) change.  The original log
    is untouched.
    """
    if log.hv_trace is None:
        raise ValueError("replay requires a log with a recorded hv trace")
    new_config = replace(
        log.config,
        angles=tuple(float(a) for a in alt_angles),
        schedule=alt_schedule if alt_schedule is not None else log.config.schedule,
    )
    return _simulate(new_config, log.hv_trace)


def switch_roles_midrun(config: RunConfig) -> RunLog:
    """Run with a role policy that flips master/slave at listed slots."""
    if config.role_policy.kind != "switch":
        raise ValueError("switch_roles_midrun needs a 'switch' role policy")
    return run(config)


@dataclass(frozen=True)
class StationGeometry:
    """Stations and source on a line; units with the vacuum light speed = 1.

    signal_speed is the photon propagation speed in the medium (fiber),
    at most 1.
    """

    x_source: float
    x_a: float
    x_b: float
    signal_speed: float = 1.0
    t_emission: float = 0.0

    def __post_init__(self):
        if self.x_a == self.x_b:
            raise ValueError("degenerate geometry: stations A and B coincide")
        if not 0.0 < self.signal_speed <= 1.0:
            raise ValueError("signal_speed must be in (0, 1]")


@dataclass(frozen=True)
class RoleAssignment:
    master: str  # "A" or "B"
    t_a: float  # when the A-bound photon enters B's collapsed region
    t_b: float  # when the B-bound photon enters A's collapsed region


def _collapsed_zone_entry(
    x_src: float, t0: float, speed: float, x_target: float, x_event: float, t_event: float
) -> float:
    """First time the photon flying from the source to x_target is inside the
    collapsed region of the measurement event at (x_event, t_event).

    The collapse covers everything outside the event's past light cone, so
    the entry condition is t >= t_event - |x(t) - x_event|.  Returns inf if
    the photon is detected while still inside the past cone.
    """
    direction = math.copysign(1.0, x_target - x_src) if x_target != x_src else 0.0
    t_detect = t0 + abs(x_target - x_src) / speed

    def x_at(t: float) -> float:
        return x_src + direction * speed * (t - t0)

    def f(t: float) -> float:
        return t - t_event + abs(x_at(t) - x_event)

    # f is nondecreasing and piecewise linear with at most one kink (where
    # the photon passes the event's station).
    breakpoints = [t0, t_detect]
    if direction != 0.0 and (x_event - x_src) * direction > 0.0:
        t_kink = t0 + abs(x_event - x_src) / speed
        if t0 < t_kink < t_detect:
            breakpoints.insert(1, t_kink)
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        f_lo, f_hi = f(lo), f(hi)
        if f_lo >= 0.0:
            return lo
        if f_hi >= 0.0:
            return lo + (hi - lo) * (0.0 - f_lo) / (f_hi - f_lo)
    if f(t_detect) >= 0.0:
        return t_detect
    return math.inf


def assign_roles(geom: StationGeometry) -> RoleAssignment:
    """Pick the master station from the collapse geometry.

    The photon bound for B enters A's collapsed region at t_b, and vice
    versa; whichever photon learns the remote outcome first makes the remote
    station the master (ties go to A).  With photons at the vacuum speed
    both entries degenerate to the emission time.
    """
    t_a_event = geom.t_emission + abs(geom.x_a - geom.x_source) / geom.signal_speed
    t_b_event = geom.t_emission + abs(geom.x_b - geom.x_source) / geom.signal_speed
    t_b = _collapsed_zone_entry(
        geom.x_source, geom.t_emission, geom.signal_speed, geom.x_b, geom.x_a, t_a_event
    )
    t_a = _collapsed_zone_entry(
        geom.x_source, geom.t_emission, geom.signal_speed, geom.x_a, geom.x_b, t_b_event
    )
    master = "B" if t_a < t_b else "A"
    return RoleAssignment(master=master, t_a=t_a, t_b=t_b)
