"""Plain-text file formats: run configs, time-stamped outcome series, hidden
history traces, summaries, scan tables, and replay diff reports.

All writers are deterministic (no clocks, no locale) and atomic (temp file +
rename).  Floats serialize with repr, which round-trips exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import (
    A_LABELS,
    B_LABELS,
    HvTrace,
    RolePolicy,
    RunConfig,
    RunLog,
    SettingsSchedule,
    StationGeometry,
    derive_streams,
)
from .model import PairSourceConfig

TSV_HEADER = "# wqm-tsv v1"
TRACE_HEADER = "# wqm-trace v1"
SUMMARY_HEADER = "# wqm-summary v1"
SCAN_HEADER = "# wqm-scan v1"
DIFF_HEADER = "# wqm-diff v1"

_OUTCOME_TEXT = {1: "+1", -1: "-1", 0: "0"}
_TEXT_OUTCOME = {v: k for k, v in _OUTCOME_TEXT.items()}

_CONFIG_KEYS = (
    "n_slots",
    "alpha",
    "alpha_prime",
    "beta",
    "beta_prime",
    "threshold_u",
    "seed",
    "contextual",
    "schedule",
    "role_policy",
    "source.angle_law",
    "source.modulus_law",
)
_REQUIRED_KEYS = ("n_slots", "alpha", "alpha_prime", "beta", "beta_prime", "seed")


class FormatError(ValueError):
    """Malformed or inconsistent input file."""


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a whole file via a temp sibling and rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ----------------------------------------------------------------- config --


def _parse_kv_lines(lines, where: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{where}: line {i}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in out:
            raise FormatError(f"{where}: duplicate key {key!r}")
        out[key] = value
    return out


def _parse_angle(key: str, value: str) -> float:
    try:
        angle = float(value)
    except ValueError:
        raise FormatError(
            f"angle {key!r} must be a plain decimal in radians, got {value!r}"
        ) from None
    if not math.isfinite(angle):
        raise FormatError(f"angle {key!r} must be finite, got {value!r}")
    return angle


def _parse_bool(key: str, value: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise FormatError(f"{key!r} must be 'true' or 'false', got {value!r}")


def _parse_role_policy(value: str, n_slots: int) -> RolePolicy:
    if value == "fixed_a":
        return RolePolicy.fixed_a()
    if value == "fixed_b":
        return RolePolicy.fixed_b()
    if value.startswith("switch_every:"):
        step = int(value.split(":", 1)[1])
        if step < 1:
            raise FormatError(f"switch_every step must be >= 1, got {step}")
        return RolePolicy.switch_at(range(step, n_slots + 1, step))
    if value.startswith("switch:"):
        body = value.split(":", 1)[1]
        slots = [int(s) for s in body.split(",") if s.strip()] if body.strip() else []
        return RolePolicy.switch_at(slots)
    if value.startswith("geometry:"):
        parts = [float(p) for p in value.split(":", 1)[1].split(",")]
        if len(parts) not in (3, 4):
            raise FormatError("geometry policy needs x_source,x_a,x_b[,signal_speed]")
        speed = parts[3] if len(parts) == 4 else 1.0
        return RolePolicy.from_geometry(
            StationGeometry(x_source=parts[0], x_a=parts[1], x_b=parts[2], signal_speed=speed)
        )
    raise FormatError(f"unknown role_policy {value!r}")


def _role_policy_text(policy: RolePolicy) -> str:
    if policy.kind in ("fixed_a", "fixed_b"):
        return policy.kind
    if policy.kind == "switch":
        return "switch:" + ",".join(str(s) for s in policy.switch_slots)
    if policy.kind == "geometry":
        g = policy.geometry
        return f"geometry:{g.x_source!r},{g.x_a!r},{g.x_b!r},{g.signal_speed!r}"
    raise FormatError(f"role policy {policy.kind!r} has no text form")


def config_from_text(text: str, where: str = "config") -> RunConfig:
    """Parse a key/value run description; unknown keys are rejected."""
    kv = _parse_kv_lines(text.splitlines(), where)
    unknown = sorted(set(kv) - set(_CONFIG_KEYS))
    if unknown:
        raise FormatError(f"{where}: unknown keys {unknown}")
    missing = sorted(set(_REQUIRED_KEYS) - set(kv))
    if missing:
        raise FormatError(f"{where}: missing required keys {missing}")

    n_slots = int(kv["n_slots"])
    angles = tuple(
        _parse_angle(k, kv[k]) for k in ("alpha", "alpha_prime", "beta", "beta_prime")
    )
    threshold_u = float(kv.get("threshold_u", "1.0"))
    seed = int(kv["seed"])
    contextual = _parse_bool("contextual", kv.get("contextual", "true"))
    angle_law = kv.get("source.angle_law", "uniform")
    modulus_law = kv.get("source.modulus_law", "constant")
    source = PairSourceConfig(seed=seed, angle_law=angle_law, modulus_law=modulus_law)

    schedule_kind = kv.get("schedule", "block")
    if schedule_kind == "block":
        schedule = SettingsSchedule.block(n_slots)
    elif schedule_kind == "random":
        _, sched_rng, _ = derive_streams(seed)
        schedule = SettingsSchedule.random_switching(n_slots, sched_rng)
    else:
        raise FormatError(f"schedule must be 'block' or 'random', got {schedule_kind!r}")

    role_policy = _parse_role_policy(kv.get("role_policy", "fixed_a"), n_slots)
    return RunConfig(
        n_slots=n_slots,
        angles=angles,
        threshold_u=threshold_u,
        source=source,
        schedule=schedule,
        contextual=contextual,
        role_policy=role_policy,
    )


def load_config(path: str | Path) -> RunConfig:
    return config_from_text(Path(path).read_text(encoding="utf-8"), where=str(path))


def config_to_text(config: RunConfig) -> str:
    """Serialize a config whose schedule came from a config file."""
    if config.schedule.kind not in ("block", "random"):
        raise FormatError(
            f"schedule kind {config.schedule.kind!r} has no config-file form"
        )
    alpha, alpha_prime, beta, beta_prime = config.angles
    lines = [
        f"n_slots = {config.n_slots}",
        f"alpha = {alpha!r}",
        f"alpha_prime = {alpha_prime!r}",
        f"beta = {beta!r}",
        f"beta_prime = {beta_prime!r}",
        f"threshold_u = {config.threshold_u!r}",
        f"seed = {config.source.seed}",
        f"contextual = {'true' if config.contextual else 'false'}",
        f"schedule = {config.schedule.kind}",
        f"role_policy = {_role_policy_text(config.role_policy)}",
        f"source.angle_law = {config.source.angle_law}",
        f"source.modulus_law = {config.source.modulus_law}",
    ]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------- time-stamped series --


def timestamp_text(log: RunLog) -> str:
    """Render a log as the tab-separated time-stamp format."""
    sched = log.config.schedule
    la = np.array(A_LABELS)[sched.choice_a]
    lb = np.array(B_LABELS)[sched.choice_b]
    lines = [TSV_HEADER]
    out_a = log.outcome_a
    out_b = log.outcome_b
    for t in range(log.n_slots):
        lines.append(
            f"{t + 1}\t{la[t]}\t{lb[t]}\t{_OUTCOME_TEXT[int(out_a[t])]}\t{_OUTCOME_TEXT[int(out_b[t])]}"
        )
    return "\n".join(lines) + "\n"


def write_timestamp_file(path: str | Path, log: RunLog) -> None:
    atomic_write_text(path, timestamp_text(log))


@dataclass(frozen=True)
class TimeStampSeries:
    """In-memory form of a time-stamp file."""

    choice_a: np.ndarray
    choice_b: np.ndarray
    outcome_a: np.ndarray
    outcome_b: np.ndarray

    @property
    def n_slots(self) -> int:
        return int(self.choice_a.size)


def read_timestamp_file(path: str | Path) -> TimeStampSeries:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TSV_HEADER:
        raise FormatError(f"{path}: missing header {TSV_HEADER!r}")
    ca, cb, oa, ob = [], [], [], []
    prev_slot = 0
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise FormatError(f"{path}: line {i}: expected 5 tab-separated fields")
        slot = int(fields[0])
        if slot <= prev_slot:
            raise FormatError(f"{path}: line {i}: slots must be strictly increasing")
        if slot != prev_slot + 1:
            raise FormatError(f"{path}: line {i}: slot numbering must be contiguous")
        prev_slot = slot
        if fields[1] not in A_LABELS or fields[2] not in B_LABELS:
            raise FormatError(f"{path}: line {i}: bad setting labels {fields[1:3]}")
        if fields[3] not in _TEXT_OUTCOME or fields[4] not in _TEXT_OUTCOME:
            raise FormatError(f"{path}: line {i}: bad outcomes {fields[3:5]}")
        ca.append(A_LABELS.index(fields[1]))
        cb.append(B_LABELS.index(fields[2]))
        oa.append(_TEXT_OUTCOME[fields[3]])
        ob.append(_TEXT_OUTCOME[fields[4]])
    if not ca:
        raise FormatError(f"{path}: no records")
    return TimeStampSeries(
        choice_a=np.array(ca, dtype=np.uint8),
        choice_b=np.array(cb, dtype=np.uint8),
        outcome_a=np.array(oa, dtype=np.int8),
        outcome_b=np.array(ob, dtype=np.int8),
    )


def log_from_series(series: TimeStampSeries, config: RunConfig, trace: HvTrace | None) -> RunLog:
    """Attach file-loaded outcomes to a config (schedule taken from the file)."""
    schedule = SettingsSchedule(series.choice_a, series.choice_b, kind="custom")
    from dataclasses import replace

    config = replace(config, n_slots=series.n_slots, schedule=schedule)
    return RunLog(
        config=config,
        outcome_a=series.outcome_a.copy(),
        outcome_b=series.outcome_b.copy(),
        hv_trace=trace,
    )


# ------------------------------------------------------------------ trace --


def trace_text(log: RunLog) -> str:
    if log.hv_trace is None:
        raise FormatError("log has no hv trace to write")
    t = log.hv_trace
    lines = [TRACE_HEADER, "[config]"]
    lines.append(config_to_text(log.config).rstrip("\n"))
    lines.append("[memories]")
    for name, value in zip(("a_plus", "a_minus", "b_plus", "b_minus"), t.initial_memories):
        lines.append(f"{name} = {float(value)!r}")
    lines.append("[pairs]")
    for i in range(len(t.angles)):
        lines.append(f"{i + 1}\t{float(t.moduli[i])!r}\t{float(t.angles[i])!r}")
    return "\n".join(lines) + "\n"


def write_trace_file(path: str | Path, log: RunLog) -> None:
    atomic_write_text(path, trace_text(log))


def read_trace_file(path: str | Path) -> tuple[RunConfig, HvTrace]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise FormatError(f"{path}: missing header {TRACE_HEADER!r}")
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name in sections:
                raise FormatError(f"{path}: duplicate section [{name}]")
            current = sections.setdefault(name, [])
            continue
        if current is None:
            if line.strip():
                raise FormatError(f"{path}: content before first section")
            continue
        current.append(line)
    for required in ("config", "memories", "pairs"):
        if required not in sections:
            raise FormatError(f"{path}: missing section [{required}]")
    config = config_from_text("\n".join(sections["config"]), where=f"{path}[config]")
    mem_kv = _parse_kv_lines(sections["memories"], f"{path}[memories]")
    try:
        memories = np.array(
            [float(mem_kv[k]) for k in ("a_plus", "a_minus", "b_plus", "b_minus")],
            dtype=np.float64,
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing memory value {exc}") from None
    moduli, angles = [], []
    prev = 0
    for line in sections["pairs"]:
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"{path}: pair lines need slot, modulus, angle")
        slot = int(fields[0])
        if slot != prev + 1:
            raise FormatError(f"{path}: pair slots must be contiguous from 1")
        prev = slot
        moduli.append(float(fields[1]))
        angles.append(float(fields[2]))
    if prev != config.n_slots:
        raise FormatError(f"{path}: {prev} pairs but n_slots = {config.n_slots}")
    trace = HvTrace(
        angles=np.array(angles, dtype=np.float64),
        moduli=np.array(moduli, dtype=np.float64),
        initial_memories=memories,
    )
    return config, trace


# ---------------------------------------------------------------- summary --


def summary_text(log: RunLog) -> str:
    """Machine-parsable run summary: counts, correlators, Bell parameters,
    singles fractions.  Key order is fixed."""
    from . import stats

    counts = stats.count_coincidences(log)
    lines = [SUMMARY_HEADER, f"n_slots = {log.n_slots}"]
    lines.append(f"contextual = {'true' if log.config.contextual else 'false'}")
    key_of = {"alpha": "alpha", "alpha'": "alpha_prime", "beta": "beta", "beta'": "beta_prime"}
    for (la, lb), c in sorted(counts.items(), key=lambda kv: (key_of[kv[0][0]], key_of[kv[0][1]])):
        stem = f"counts.{key_of[la]}.{key_of[lb]}"
        lines.append(f"{stem}.pp = {c.n_pp}")
        lines.append(f"{stem}.pm = {c.n_pm}")
        lines.append(f"{stem}.mp = {c.n_mp}")
        lines.append(f"{stem}.mm = {c.n_mm}")
        lines.append(f"{stem}.zero = {c.n_zero}")
        lines.append(f"{stem}.total = {c.n_total}")
        if c.n_coincident:
            lines.append(f"E.{key_of[la]}.{key_of[lb]} = {stats.correlator(c)!r}")
    if all(p in counts for p in stats.CHSH_PAIRINGS):
        lines.append(f"S = {stats.chsh(log).s!r}")
        lines.append(f"J = {stats.ch(log).j!r}")
    for station in ("a", "b"):
        frac, det = stats.singles_plus_fraction(log, station)
        lines.append(f"singles.{station}.plus_fraction = {frac!r}")
        lines.append(f"singles.{station}.detections = {det}")
    return "\n".join(lines) + "\n"


def write_summary_file(path: str | Path, log: RunLog) -> None:
    atomic_write_text(path, summary_text(log))


# ------------------------------------------------------------- scan table --


def scan_text(points) -> str:
    lines = [SCAN_HEADER, "delta\trate_on\trate_off"]
    for p in points:
        lines.append(f"{p.delta!r}\t{p.rate_on!r}\t{p.rate_off!r}")
    return "\n".join(lines) + "\n"


def write_scan_file(path: str | Path, points) -> None:
    atomic_write_text(path, scan_text(points))


# ------------------------------------------------------------ diff report --


def diff_text(station: str, slots: list[int], original: RunLog, replay: RunLog) -> str:
    out_orig = original.outcome_a if station == "A" else original.outcome_b
    out_rep = replay.outcome_a if station == "A" else replay.outcome_b
    lines = [DIFF_HEADER, f"station = {station}", f"n_diff = {len(slots)}"]
    lines.append("slot\toriginal\treplay")
    for s in slots:
        lines.append(
            f"{s}\t{_OUTCOME_TEXT[int(out_orig[s - 1])]}\t{_OUTCOME_TEXT[int(out_rep[s - 1])]}"
        )
    return "\n".join(lines) + "\n"
