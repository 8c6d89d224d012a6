"""
Heartbeat variability screening.

v(H) is the mean over time of the cross-beat standard deviation, a(H) the mean
over beats of the within-beat standard deviation, and v_h = v(H) / a(H). A
record is a regular prototype donor when v_h is below the threshold in every
lead.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .exceptions import DegenerateFlatBeats, NotEnoughBeats
from .preprocess import BeatSet
from .records import ALL_LEADS, LeadId

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VariabilityReport:
    record_id: str
    per_lead_vh: Mapping[LeadId, float]
    max_vh: float
    eligible: bool
    reason: str = ""

    def as_row(self) -> Dict[str, object]:
        row = {"record_id": self.record_id}  # type: Dict[str, object]
        for lead in ALL_LEADS:
            row[lead.value] = self.per_lead_vh.get(lead, float("nan"))
        row["max_vh"] = self.max_vh
        row["eligible"] = self.eligible
        row["reason"] = self.reason
        return row


def _require_two(beats: BeatSet):
    if beats.n < 2:
        raise NotEnoughBeats(
            "{}: variability needs at least 2 beats, got {}".format(
                beats.lead, beats.n
            )
        )


def variability(beats: BeatSet) -> float:
    _require_two(beats)
    # Relative to the first beat, so identical beats give exactly zero.
    deviations = beats.beats - beats.beats[0]
    return float(np.mean(np.std(deviations, axis=0, ddof=1)))


def activity(beats: BeatSet) -> float:
    _require_two(beats)
    deviations = beats.beats - beats.beats[:, :1]
    return float(np.mean(np.std(deviations, axis=1, ddof=1)))


def vh(beats: BeatSet) -> float:
    a = activity(beats)
    if a == 0:
        raise DegenerateFlatBeats(
            "{}: every beat is flat, v_h is undefined".format(beats.lead)
        )
    return variability(beats) / a


def screen_record(
    record_id: str, beat_sets: Mapping[LeadId, BeatSet], threshold: float = 0.3
) -> VariabilityReport:
    per_lead = {}  # type: Dict[LeadId, float]
    reason = ""

    for lead in ALL_LEADS:
        if lead not in beat_sets:
            reason = "missing lead {}".format(lead)
            break
        try:
            per_lead[lead] = vh(beat_sets[lead])
        except (DegenerateFlatBeats, NotEnoughBeats) as e:
            reason = str(e)
            break

    if reason:
        return VariabilityReport(
            record_id=record_id,
            per_lead_vh=per_lead,
            max_vh=float("inf"),
            eligible=False,
            reason=reason,
        )

    max_vh = max(per_lead.values())
    eligible = max_vh < threshold
    return VariabilityReport(
        record_id=record_id,
        per_lead_vh=per_lead,
        max_vh=max_vh,
        eligible=eligible,
        reason="" if eligible else "max v_h {:.4f} >= {}".format(
            max_vh, threshold
        ),
    )


def screen(
    records: Iterable[Tuple[str, Mapping[LeadId, BeatSet]]],
    threshold: float = 0.3,
) -> List[VariabilityReport]:
    """Screen `(record_id, beat sets)` pairs, preserving input order."""
    reports = []
    for record_id, beat_sets in records:
        report = screen_record(record_id, beat_sets, threshold)
        if report.reason and not np.isfinite(report.max_vh):
            logger.warning(
                "stage=screen record=%s status=ineligible reason=%r",
                record_id,
                report.reason,
            )
        reports.append(report)
    return reports


def eligible_ids(
    reports: Iterable[VariabilityReport], threshold: Optional[float] = None
) -> List[str]:
    return [
        x.record_id
        for x in reports
        if (x.eligible if threshold is None else x.max_vh < threshold)
    ]
