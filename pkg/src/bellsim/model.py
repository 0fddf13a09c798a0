"""Vector hidden variables, projection, and threshold-memory detection.

A photon pair carries one polarization vector (modulus + axis angle), equal
for both photons at emission.  A detector gate accumulates the squared
modulus of the vector projected on its axis; when the accumulator reaches
the threshold u the gate fires and u is subtracted.  Everything here is a
pure function of explicit state, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def reduce_axis_angle(angle: float) -> float:
    """Reduce a polarization-axis angle to [0, pi): an axis and its opposite
    direction are the same physical feature."""
    a = math.fmod(angle, math.pi)
    if a < 0.0:
        a += math.pi
    # fmod of a negative near-multiple of pi can round back up to pi
    if a >= math.pi:
        a = 0.0
    return a


@dataclass(frozen=True)
class PolarizationVector:
    """Hidden variable of one photon: modulus and axis angle in real space."""

    modulus: float
    angle: float

    def __post_init__(self):
        if self.modulus < 0.0:
            raise ValueError(f"modulus must be >= 0, got {self.modulus}")
        object.__setattr__(self, "angle", reduce_axis_angle(self.angle))

    @property
    def energy(self) -> float:
        """Squared modulus (detection-weight units)."""
        return self.modulus * self.modulus


@dataclass(frozen=True)
class AnalyzerAxis:
    """Orientation of a polarizer gate, reduced to [0, pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", reduce_axis_angle(self.angle))

    def orthogonal(self) -> "AnalyzerAxis":
        """Axis of the companion (reflected/exclusive) gate."""
        return AnalyzerAxis(self.angle + math.pi / 2.0)


@dataclass(frozen=True)
class GateMemory:
    """Per-gate accumulator with firing threshold u."""

    accumulator: float
    threshold: float

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if not 0.0 <= self.accumulator:
            raise ValueError(f"accumulator must be >= 0, got {self.accumulator}")


@dataclass(frozen=True)
class PairSourceConfig:
    """Source of entangled pairs: per-pair draw laws and the run seed.

    angle_law:   only "uniform" (axis angle uniform on [0, pi)) is built in.
    modulus_law: only "constant" is built in; the constant defaults to
                 sqrt(u) of the run so each station collects on average one
                 threshold-worth of energy per slot (dense detections).
    """

    seed: int
    angle_law: str = "uniform"
    modulus_law: str = "constant"
    modulus: float | None = None

    def __post_init__(self):
        if self.angle_law != "uniform":
            raise ValueError(f"unsupported angle_law: {self.angle_law!r}")
        if self.modulus_law != "constant":
            raise ValueError(f"unsupported modulus_law: {self.modulus_law!r}")
        if self.modulus is not None and self.modulus < 0.0:
            raise ValueError("modulus must be >= 0")


def project(vec: PolarizationVector, axis: AnalyzerAxis) -> PolarizationVector:
    """Project a polarization vector onto an analyzer axis.

    The result has modulus |vec| * |cos(angle difference)| and points along
    the axis.  Orthogonal axes are exclusive: the projection vanishes.
    """
    c = math.cos(vec.angle - axis.angle)
    return PolarizationVector(vec.modulus * abs(c), axis.angle)


def emit_pair(
    source: PairSourceConfig, rng: np.random.Generator, default_modulus: float = 1.0
) -> tuple[PolarizationVector, PolarizationVector]:
    """Draw one entangled pair: two identical vectors, laws per `source`.

    Advances `rng` deterministically (one uniform draw for the angle).
    """
    angle = rng.uniform(0.0, math.pi)
    modulus = source.modulus if source.modulus is not None else default_modulus
    v = PolarizationVector(modulus, angle)
    return v, v


def gate_step(memory: GateMemory, energy: float) -> tuple[GateMemory, bool]:
    """Deposit energy into a gate memory; fire when the sum reaches threshold.

    On a firing the threshold is subtracted exactly once, so a single deposit
    larger than the threshold leaves a remainder that may still exceed it
    (never the case with the default constant-modulus source, whose deposits
    are bounded by u).
    """
    if energy < 0.0:
        raise ValueError(f"energy must be >= 0, got {energy}")
    acc = memory.accumulator + energy
    fired = acc >= memory.threshold
    if fired:
        acc -= memory.threshold
    return GateMemory(acc, memory.threshold), fired


def station_measure(
    vec: PolarizationVector,
    analyzer: AnalyzerAxis,
    mem_plus: GateMemory,
    mem_minus: GateMemory,
) -> tuple[int, AnalyzerAxis | None, GateMemory, GateMemory]:
    """Measure one photon at one station.

    The +1 gate sits on the analyzer axis, the -1 gate on its orthogonal.
    Both gates receive their projected energies; the energies split the
    vector's squared modulus exactly.  Returns (outcome, fired_axis,
    mem_plus', mem_minus') with outcome 0 when neither gate fired.  If both
    fire in one step (possible only under custom source laws) the gate with
    the larger pre-subtraction accumulator wins, ties to +1.
    """
    c = math.cos(vec.angle - analyzer.angle)
    e_plus = vec.energy * (c * c)
    e_minus = vec.energy - e_plus
    pre_plus = mem_plus.accumulator + e_plus
    pre_minus = mem_minus.accumulator + e_minus
    mem_plus, fired_plus = gate_step(mem_plus, e_plus)
    mem_minus, fired_minus = gate_step(mem_minus, e_minus)
    if fired_plus and fired_minus:
        outcome = 1 if pre_plus >= pre_minus else -1
    elif fired_plus:
        outcome = 1
    elif fired_minus:
        outcome = -1
    else:
        outcome = 0
    if outcome == 1:
        fired_axis = analyzer
    elif outcome == -1:
        fired_axis = analyzer.orthogonal()
    else:
        fired_axis = None
    return outcome, fired_axis, mem_plus, mem_minus
