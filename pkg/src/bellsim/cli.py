"""Command-line surface: simulate, scan, chsh, replay, condense."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio, sica, stats
from .engine import counterfactual_replay, run
from .fileio import FormatError


def _parse_angles(text: str) -> tuple[float, float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise FormatError("--angles needs four comma-separated radians: alpha,alpha',beta,beta'")
    return tuple(fileio._parse_angle(f"angles[{i}]", p) for i, p in enumerate(parts))


def cmd_simulate(config_path: str, out_path: str, trace_path: str | None = None) -> int:
    """Run a config file; write the time-stamp series and a summary (and the
    hidden-history trace when requested)."""
    config = fileio.load_config(config_path)
    log = run(config)
    fileio.write_timestamp_file(out_path, log)
    fileio.write_summary_file(str(out_path) + ".summary", log)
    if trace_path is not None:
        fileio.write_trace_file(trace_path, log)
    print(f"wrote {out_path} ({log.n_slots} slots) and {out_path}.summary")
    return 0


def cmd_scan(config_path: str, deltas: list[float], out_path: str) -> int:
    """Coincidence-rate curve over analyzer angle differences."""
    config = fileio.load_config(config_path)
    points = stats.curve_scan(config, deltas)
    fileio.write_scan_file(out_path, points)
    print(f"wrote {out_path} ({len(points)} angle differences)")
    return 0


def cmd_chsh(ts_path: str, out_path: str | None = None) -> int:
    """Bell parameters of a recorded series."""
    series = fileio.read_timestamp_file(ts_path)
    log = fileio.log_from_series(series, _bare_config(series), trace=None)
    result = stats.chsh(log)
    ch_result = stats.ch(log)
    lines = []
    key_of = {"alpha": "alpha", "alpha'": "alpha_prime", "beta": "beta", "beta'": "beta_prime"}
    for pairing in stats.CHSH_PAIRINGS:
        la, lb = pairing
        lines.append(f"E.{key_of[la]}.{key_of[lb]} = {result.e[pairing]!r}")
    lines.append(f"S = {result.s!r}")
    lines.append(f"J = {ch_result.j!r}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path is not None:
        fileio.atomic_write_text(out_path, text)
    return 0


def _bare_config(series: fileio.TimeStampSeries):
    """Minimal config for file-loaded series (labels carry the information)."""
    from .engine import RunConfig, SettingsSchedule
    from .model import PairSourceConfig

    return RunConfig(
        n_slots=series.n_slots,
        angles=(0.0, 0.0, 0.0, 0.0),
        threshold_u=1.0,
        source=PairSourceConfig(seed=0),
        schedule=SettingsSchedule(series.choice_a, series.choice_b, kind="custom"),
    )


def cmd_replay(ts_path: str, trace_path: str, angles: tuple[float, float, float, float], out_path: str) -> int:
    """Re-measure a recorded run under new analyzer angles; write the replay
    series and a diff report for the station whose setting stayed fixed."""
    series = fileio.read_timestamp_file(ts_path)
    config, trace = fileio.read_trace_file(trace_path)
    if series.n_slots != config.n_slots:
        raise FormatError(
            f"{ts_path} has {series.n_slots} slots but trace config says {config.n_slots}"
        )
    original = fileio.log_from_series(series, config, trace)
    replayed = counterfactual_replay(original, angles)
    fileio.write_timestamp_file(out_path, replayed)

    set_a1, set_b1 = original.applied_settings()
    set_a2, set_b2 = replayed.applied_settings()
    a_changed = not np.array_equal(set_a1, set_a2)
    b_changed = not np.array_equal(set_b1, set_b2)
    diff_slots = sica.sica_locality_diff(original, replayed)
    if a_changed and not b_changed:
        station = "B"
    elif b_changed and not a_changed:
        station = "A"
    else:
        station = "A,B"
    diff_path = str(out_path) + ".diff"
    fileio.atomic_write_text(diff_path, fileio.diff_text(station, diff_slots, original, replayed))
    print(
        f"wrote {out_path} and {diff_path}: station {station} differs in "
        f"{len(diff_slots)} of {original.n_slots} slots"
    )
    return 0


def _format_condensed(table: sica.CondensedTable) -> str:
    header = "set\\i\t" + "\t".join(str(i + 1) for i in range(table.n_columns))
    rows = [header]
    for label, row in zip(sica.ROW_LABELS, table.cells):
        rows.append(label + "\t" + "\t".join("+" if v == 1 else "-" for v in row))
    return "\n".join(rows)


def cmd_condense(ts_path: str, out_path: str | None = None) -> int:
    """Condense a block-schedule series; print the table and its verified
    Bell parameters, or the reason no legitimate reordering exists."""
    series = fileio.read_timestamp_file(ts_path)
    log = fileio.log_from_series(series, _bare_config(series), trace=None)
    table = sica.build_table(log)
    result = sica.condense(table)
    if isinstance(result, sica.Infeasible):
        lines = ["INFEASIBLE", f"witness: {result.witness}"]
        if result.dropped_zero_slots:
            lines.append(f"dropped_zero_slots: {result.dropped_zero_slots}")
        text = "\n".join(lines) + "\n"
        sys.stdout.write(text)
        if out_path is not None:
            fileio.atomic_write_text(out_path, text)
        return 1
    s = sica.verify_chsh_bound(result)
    j = sica.verify_ch_bound(result)
    lines = [_format_condensed(result)]
    if result.dropped_zero_slots:
        lines.append(f"dropped_zero_slots: {result.dropped_zero_slots}")
    lines.append(f"S = {s!r}")
    lines.append(f"J = {j!r}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path is not None:
        fileio.atomic_write_text(out_path, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description=(
            "Deterministic event-by-event simulator of a time-stamped Bell "
            "experiment, with CHSH/CH analysis, counterfactual replay, and "
            "outcome-table condensation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a config and write the outcome series")
    p.add_argument("--config", required=True, help="run description (key = value text)")
    p.add_argument("--out", required=True, help="output time-stamp file")
    p.add_argument("--trace", help="also record the hidden history for replays")

    p = sub.add_parser("scan", help="coincidence-rate curve over angle differences")
    p.add_argument("--config", required=True, help="base run description")
    p.add_argument("--deltas", required=True, help="comma-separated differences (radians)")
    p.add_argument("--out", required=True, help="output table")

    p = sub.add_parser("chsh", help="Bell parameters of a recorded series")
    p.add_argument("tsfile", help="time-stamp file")
    p.add_argument("--out", help="also write the report here")

    p = sub.add_parser("replay", help="re-measure a recorded run under new angles")
    p.add_argument("tsfile", help="original time-stamp file")
    p.add_argument("--trace", required=True, help="hidden-history trace of the original run")
    p.add_argument("--angles", required=True, help="new alpha,alpha',beta,beta' (radians)")
    p.add_argument("--out", required=True, help="output time-stamp file (diff goes to <out>.diff)")

    p = sub.add_parser("condense", help="condense a block-schedule series if possible")
    p.add_argument("tsfile", help="time-stamp file")
    p.add_argument("--out", help="also write the report here")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out, args.trace)
        if args.command == "scan":
            deltas = [float(d) for d in args.deltas.split(",") if d.strip()]
            return cmd_scan(args.config, deltas, args.out)
        if args.command == "chsh":
            return cmd_chsh(args.tsfile, args.out)
        if args.command == "replay":
            return cmd_replay(args.tsfile, args.trace, _parse_angles(args.angles), args.out)
        if args.command == "condense":
            return cmd_condense(args.tsfile, args.out)
        raise AssertionError(f"unhandled command {args.command}")
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
