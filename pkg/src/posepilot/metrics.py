"""Workload scoring and experiment reporting.

Raw task-load index: six subscales rated 0-20, scored as their plain mean
(no pairwise weighting). Participant demographics and per-run summaries
come in as CSV; reports go out as text tables plus plot-ready column files.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

SUBSCALES = ("mental", "physical", "temporal", "performance", "effort", "frustration")
MODALITIES = ("pose", "joystick")


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class TlxRecord:
    participant_id: str
    modality: str
    mental: float
    physical: float
    temporal: float
    performance: float  # stored low-to-high like the others, higher = worse
    effort: float
    frustration: float

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise MetricsError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        for name in SUBSCALES:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0.0 <= float(v) <= 20.0:
                raise MetricsError(f"{name} rating {v!r} outside [0, 20]")

    def ratings(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, n)) for n in SUBSCALES)


@dataclass(frozen=True)
class ParticipantRecord:
    id: str
    age: float
    gender: str
    uav_experience: str
    athlete: str
    pc_games: str
    console: str
    vr_ar: str

    def __post_init__(self):
        if self.age <= 0:
            raise MetricsError(f"participant {self.id}: age must be positive")


@dataclass(frozen=True)
class RunSummary:
    participant_id: str
    modality: str
    traversal_time: float
    collision_count: int = 0

    def __post_init__(self):
        if self.traversal_time <= 0:
            raise MetricsError(f"participant {self.participant_id}: traversal_time must be > 0")


def rtlx(record: TlxRecord) -> float:
    """Unweighted mean of the six subscale ratings."""
    vals = record.ratings()
    return sum(vals) / len(vals)


def summarize_ages(participants: Iterable[ParticipantRecord]) -> tuple[float, float]:
    ages = [float(p.age) for p in participants]
    if len(ages) < 2:
        raise MetricsError("need at least 2 participants for a sample std")
    return statistics.fmean(ages), statistics.stdev(ages)


def time_differences(runs: Iterable[RunSummary]) -> dict[str, float]:
    """Per participant: joystick time minus pose time, in seconds."""
    by: dict[str, dict[str, float]] = {}
    for r in runs:
        slot = by.setdefault(r.participant_id, {})
        if r.modality in slot:
            raise MetricsError(f"participant {r.participant_id}: duplicate {r.modality} run")
        slot[r.modality] = r.traversal_time
    out = {}
    for pid in sorted(by):
        slot = by[pid]
        missing = [m for m in MODALITIES if m not in slot]
        if missing:
            raise MetricsError(f"participant {pid}: missing {missing[0]} run")
        out[pid] = slot["joystick"] - slot["pose"]
    return out


def subscale_means(records: Iterable[TlxRecord], modality: str) -> dict[str, float]:
    rows = [r for r in records if r.modality == modality]
    if not rows:
        raise MetricsError(f"no records for modality {modality!r}")
    return {name: statistics.fmean(getattr(r, name) for r in rows) for name in SUBSCALES}


# --- CSV I/O ----------------------------------------------------------------

_P_COLS = ("id", "age", "gender", "uav_experience", "athlete", "pc_games", "console", "vr_ar")
_T_COLS = ("participant", "modality") + SUBSCALES
_R_COLS = ("participant", "modality", "traversal_time", "collision_count")


def _reader(text: str, required: tuple[str, ...], what: str) -> list[dict]:
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames is None:
        raise MetricsError(f"{what}: empty file")
    missing = [c for c in required if c not in rd.fieldnames]
    if missing:
        raise MetricsError(f"{what}: missing columns {missing}")
    return list(rd)


def read_participants(text: str) -> list[ParticipantRecord]:
    rows = _reader(text, _P_COLS, "participants table")
    out = []
    for i, row in enumerate(rows, start=2):
        try:
            out.append(ParticipantRecord(
                id=row["id"], age=float(row["age"]), gender=row["gender"],
                uav_experience=row["uav_experience"], athlete=row["athlete"],
                pc_games=row["pc_games"], console=row["console"], vr_ar=row["vr_ar"]))
        except (ValueError, MetricsError) as e:
            raise MetricsError(f"participants table line {i}: {e}") from e
    return out


def read_tlx(text: str) -> list[TlxRecord]:
    rows = _reader(text, _T_COLS, "tlx table")
    out = []
    for i, row in enumerate(rows, start=2):
        try:
            out.append(TlxRecord(
                participant_id=row["participant"], modality=row["modality"],
                **{name: float(row[name]) for name in SUBSCALES}))
        except (ValueError, MetricsError) as e:
            raise MetricsError(f"tlx table line {i}: {e}") from e
    return out


def read_runs(text: str) -> list[RunSummary]:
    rows = _reader(text, _R_COLS, "runs table")
    out = []
    for i, row in enumerate(rows, start=2):
        try:
            out.append(RunSummary(
                participant_id=row["participant"], modality=row["modality"],
                traversal_time=float(row["traversal_time"]),
                collision_count=int(row["collision_count"] or 0)))
        except (ValueError, MetricsError) as e:
            raise MetricsError(f"runs table line {i}: {e}") from e
    return out


# --- report bundle ----------------------------------------------------------

def _table(headers: list[str], rows: list[list]) -> str:
    cols = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(headers))]
    def fmt(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in cols[1:]]
    return "\n".join(lines) + "\n"


def write_report(out_dir: str | Path,
                 participants: list[ParticipantRecord],
                 tlx: list[TlxRecord],
                 runs: list[RunSummary] | None = None) -> dict[str, str]:
    """Emit the report bundle; returns {artifact name: rendered text}.

    Plot-ready files are plain TSV columns, one file per figure family:
    overall score per participant, per-participant subscale scores,
    per-subscale means, time differences.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, str] = {}
    warnings: list[str] = []

    by_part: dict[str, dict[str, float]] = {}
    for rec in tlx:
        by_part.setdefault(rec.participant_id, {})[rec.modality] = rtlx(rec)
    rows = [[pid,
             f"{by_part[pid].get('pose', float('nan')):.3f}",
             f"{by_part[pid].get('joystick', float('nan')):.3f}"]
            for pid in sorted(by_part)]
    artifacts["rtlx_per_participant.tsv"] = "participant\tpose\tjoystick\n" + \
        "".join(f"{a}\t{b}\t{c}\n" for a, b, c in rows)

    score_lines = ["participant\tmodality\t" + "\t".join(SUBSCALES)]
    for rec in sorted(tlx, key=lambda r: (r.participant_id, r.modality)):
        score_lines.append(rec.participant_id + "\t" + rec.modality + "\t" +
                           "\t".join(f"{v:.3f}" for v in rec.ratings()))
    artifacts["subscale_scores.tsv"] = "\n".join(score_lines) + "\n"

    means_by_mod = {}
    for m in MODALITIES:
        try:
            means_by_mod[m] = subscale_means(tlx, m)
        except MetricsError:
            means_by_mod[m] = None
    sub_lines = ["subscale\tpose\tjoystick"]
    for name in SUBSCALES:
        cells = [name]
        for m in MODALITIES:
            mm = means_by_mod[m]
            cells.append(f"{mm[name]:.3f}" if mm else "nan")
        sub_lines.append("\t".join(cells))
    artifacts["subscale_means.tsv"] = "\n".join(sub_lines) + "\n"

    if runs:
        try:
            diffs = time_differences(runs)
            artifacts["time_differences.tsv"] = "participant\tjoystick_minus_pose_s\n" + \
                "".join(f"{pid}\t{d:.3f}\n" for pid, d in diffs.items())
        except MetricsError as e:
            warnings.append(str(e))
    else:
        warnings.append("no run summaries supplied; time differences omitted")

    pop_lines = []
    if len(participants) >= 2:
        mean, std = summarize_ages(participants)
        pop_lines.append(f"participants: {len(participants)}")
        pop_lines.append(f"age mean: {mean:.2f}")
        pop_lines.append(f"age sample std: {std:.2f}")
        ages = [p.age for p in participants]
        pop_lines.append(f"age range: {min(ages):.0f}-{max(ages):.0f}")
    else:
        warnings.append("fewer than 2 participants; population statistics omitted")
    artifacts["population.txt"] = "\n".join(pop_lines) + ("\n" if pop_lines else "")

    summary = io.StringIO()
    summary.write("workload report\n===============\n\n")
    if pop_lines:
        summary.write("\n".join(pop_lines) + "\n\n")
    if by_part:
        summary.write(_table(["participant", "rtlx pose", "rtlx joystick"], rows))
        summary.write("\n")
    for w in warnings:
        summary.write(f"warning: {w}\n")
    artifacts["report.txt"] = summary.getvalue()

    for name, text in artifacts.items():
        (out / name).write_text(text, encoding="utf-8")
    return artifacts
