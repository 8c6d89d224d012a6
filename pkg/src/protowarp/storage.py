"""
Intermediate artifacts passed between pipeline stages: beat bundles, the
screening table and diagnosis reports.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping

import pandas as pd

from .diagnosis import ConfusionMatrix, DiagnosisReport
from .exceptions import BeatLengthMismatch, FormatVersionMismatch
from .preprocess import BeatSet, MeanBeat, PreprocessedRecord
from .records import ALL_LEADS, Label, LeadId
from .screening import VariabilityReport
from .utils import atomic_write, dump_json

logger = logging.getLogger(__name__)

BUNDLE_FORMAT_VERSION = 1

BUNDLES_DIR = "bundles"
REPORTS_DIR = "reports"
SCREENING_FILENAME = "screening.csv"
LIBRARY_FILENAME = "library.json"
CONFUSION_FILENAME = "confusion.csv"


@dataclass(frozen=True, eq=False)
class BeatBundle:
    """The segmented beats and mean beats of every lead of one record."""

    record_id: str
    label: Label
    sample_rate_hz: float
    beat_sets: Mapping[LeadId, BeatSet]
    mean_beats: Mapping[LeadId, MeanBeat]

    @property
    def beat_length(self) -> int:
        return self.beat_sets[LeadId.II].length

    @classmethod
    def from_preprocessed(cls, processed: PreprocessedRecord) -> "BeatBundle":
        return cls(
            record_id=processed.record_id,
            label=processed.record.label,
            sample_rate_hz=processed.record.sample_rate_hz,
            beat_sets=processed.beat_sets,
            mean_beats=processed.mean_beats,
        )

    def with_label(self, label: Label) -> "BeatBundle":
        return BeatBundle(
            record_id=self.record_id,
            label=label,
            sample_rate_hz=self.sample_rate_hz,
            beat_sets=self.beat_sets,
            mean_beats=self.mean_beats,
        )


def bundle_path(out: Path, record_id: str) -> Path:
    return Path(out) / BUNDLES_DIR / "{}.json".format(record_id)


def save_bundle(bundle: BeatBundle, out: Path) -> Path:
    document = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "record_id": bundle.record_id,
        "label": bundle.label.value,
        "sample_rate_hz": float(bundle.sample_rate_hz),
        "beat_length": bundle.beat_length,
        "leads": {
            lead.value: {
                "n_beats": bundle.beat_sets[lead].n,
                "mean": bundle.mean_beats[lead].samples.tolist(),
                "beats": bundle.beat_sets[lead].beats.tolist(),
            }
            for lead in ALL_LEADS
        },
    }
    path = bundle_path(out, bundle.record_id)
    dump_json(document, path)
    return path


def load_bundle(path: Path) -> BeatBundle:
    with Path(path).open() as f:
        document = json.load(f)

    version = document.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise FormatVersionMismatch(
            "{}: bundle format version {!r}, expected {}".format(
                path, version, BUNDLE_FORMAT_VERSION
            )
        )

    record_id = document["record_id"]
    beat_length = int(document["beat_length"])
    beat_sets = {}
    mean_beats = {}
    for name, entry in document["leads"].items():
        lead = LeadId.parse(name)
        beat_sets[lead] = BeatSet(lead=lead, beats=entry["beats"])
        if (
            beat_sets[lead].length != beat_length
            or len(entry["mean"]) != beat_length
        ):
            raise BeatLengthMismatch(
                "{} {}: beats do not have the declared length {}".format(
                    record_id, lead, beat_length
                )
            )
        mean_beats[lead] = MeanBeat(
            record_id=record_id,
            lead=lead,
            samples=entry["mean"],
            n_beats_averaged=int(entry["n_beats"]),
        )

    return BeatBundle(
        record_id=record_id,
        label=Label.parse(document.get("label", "Unknown")),
        sample_rate_hz=float(document["sample_rate_hz"]),
        beat_sets=beat_sets,
        mean_beats=mean_beats,
    )


def find_bundles(src: Path) -> List[Path]:
    """Bundle files under `src` or its `bundles/` directory, sorted by name."""
    src = Path(src)
    if src.is_file():
        return [src]
    if (src / BUNDLES_DIR).is_dir():
        src = src / BUNDLES_DIR
    return sorted(x for x in src.glob("*.json") if not x.name.startswith("."))


def save_screening(reports: Iterable[VariabilityReport], path: Path) -> None:
    columns = (
        ["record_id"]
        + [x.value for x in ALL_LEADS]
        + ["max_vh", "eligible", "reason"]
    )
    frame = pd.DataFrame([x.as_row() for x in reports], columns=columns)
    with atomic_write(Path(path)) as f:
        frame.to_csv(f, index=False, float_format="%.17g")


def load_screening(path: Path) -> Dict[str, VariabilityReport]:
    frame = pd.read_csv(path, dtype={"record_id": str}, keep_default_na=False)
    reports = {}
    for row in frame.to_dict(orient="records"):
        per_lead = {
            lead: float(row[lead.value])
            for lead in ALL_LEADS
            if row[lead.value] != ""
        }
        reports[row["record_id"]] = VariabilityReport(
            record_id=row["record_id"],
            per_lead_vh=per_lead,
            max_vh=float(row["max_vh"]),
            eligible=str(row["eligible"]) == "True",
            reason=str(row["reason"]),
        )
    return reports


def report_path(out: Path, record_id: str) -> Path:
    return Path(out) / REPORTS_DIR / "{}.json".format(record_id)


def save_report(report: DiagnosisReport, out: Path) -> Path:
    path = report_path(out, report.record_id)
    dump_json(report.to_document(), path)
    return path


def load_reports(src: Path) -> List[DiagnosisReport]:
    src = Path(src)
    if (src / REPORTS_DIR).is_dir():
        src = src / REPORTS_DIR
    reports = []
    for path in sorted(src.glob("*.json")):
        with path.open() as f:
            reports.append(DiagnosisReport.from_document(json.load(f)))
    return reports


def save_confusion(matrices: Mapping[str, ConfusionMatrix], path: Path) -> None:
    frame = pd.DataFrame(
        [
            dict(method=method, **matrix.as_row())
            for method, matrix in matrices.items()
        ],
        columns=[
            "method",
            "tp",
            "fp",
            "tn",
            "fn",
            "sensitivity",
            "specificity",
        ],
    )
    with atomic_write(Path(path)) as f:
        frame.to_csv(f, index=False, float_format="%.17g")
