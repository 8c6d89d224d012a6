"""
Diagnosis of new records against the prototype libraries, the two voltage
criteria used as baselines, and the confusion-matrix evaluation of all three.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix

from .exceptions import EmptyLibrary, MissingLead
from .library import Libraries, Prototype
from .records import CLASS_LABELS, Label, LeadId
from .settings import DiagnosisConfig, PipelineConfig, WarpConfig
from .warping import WarpResult, warp

logger = logging.getLogger(__name__)

METHODS = ("bsw", "sokolow_lyon", "cornell")


def prototype_distance(result: WarpResult, r_weight: float = 10.0) -> float:
    """
    How far a warp is from the identity, with the amplitude ratio weighted
    above the shift and the shift measured in beat lengths.
    """
    r = np.asarray(result.r, dtype=float)
    s = np.asarray(result.s, dtype=float)
    return float(
        r_weight * (np.max(np.abs(r - 1)) + np.std(r))
        + (np.max(np.abs(s)) + np.std(s)) / s.size
    )


def _samples(beat) -> np.ndarray:
    return np.asarray(getattr(beat, "samples", beat), dtype=float)


def _lead(record_beats: Mapping[LeadId, object], lead: LeadId) -> np.ndarray:
    try:
        return _samples(record_beats[lead])
    except KeyError:
        raise MissingLead(lead) from None


def _distinct(prototypes: Sequence[Prototype]) -> List[Tuple[int, Prototype]]:
    # Identical waveforms are one reference, whatever the library holds.
    seen = set()
    ret = []
    for index, prototype in enumerate(prototypes):
        key = prototype.samples.tobytes()
        if key in seen:
            continue
        seen.add(key)
        ret.append((index, prototype))
    return ret


@dataclass(frozen=True)
class Neighbour:
    index: int
    distance: float
    occurrence: int


@dataclass(frozen=True)
class LeadDistances:
    nearest: Mapping[Label, Tuple[Neighbour, ...]]

    def distances(self, label: Label) -> Tuple[float, ...]:
        return tuple(x.distance for x in self.nearest[label])

    def total(self, label: Label) -> float:
        return float(sum(self.distances(label)))


def nearest_prototypes(
    beat,
    prototypes: Sequence[Prototype],
    cfg: WarpConfig = WarpConfig(),
    k: int = 2,
    r_weight: float = 10.0,
) -> Tuple[Neighbour, ...]:
    """
    The `k` closest prototypes to `beat`, warping the beat onto each of them.
    A library with fewer than `k` distinct prototypes repeats its closest one.
    """
    candidates = _distinct(prototypes)
    if not candidates:
        raise EmptyLibrary("Cannot diagnose against an empty library")

    beat = _samples(beat)
    scored = sorted(
        (
            Neighbour(
                index=index,
                distance=prototype_distance(
                    warp(beat, prototype.samples, cfg), r_weight
                ),
                occurrence=prototype.occurrence,
            )
            for index, prototype in candidates
        ),
        key=lambda x: (x.distance, x.index),
    )
    nearest = scored[:k]
    while len(nearest) < k:
        nearest.append(nearest[0])
    return tuple(nearest)


@dataclass(frozen=True)
class BswResult:
    per_lead: Mapping[LeadId, LeadDistances]
    total_normal: float
    total_lvh: float

    @property
    def decision(self) -> Label:
        # A tie carries no evidence for LVH.
        return Label.LVH if self.total_normal > self.total_lvh else Label.NORMAL


def classify_bsw(
    record_beats: Mapping[LeadId, object],
    libraries: Libraries,
    warp_cfg: WarpConfig = WarpConfig(),
    config: DiagnosisConfig = DiagnosisConfig(),
) -> BswResult:
    per_lead = {}
    for lead in config.leads:
        beat = _lead(record_beats, lead)
        per_lead[lead] = LeadDistances(
            nearest={
                label: nearest_prototypes(
                    beat,
                    libraries.prototypes(label, lead),
                    warp_cfg,
                    k=config.nearest_k,
                    r_weight=config.r_weight,
                )
                for label in CLASS_LABELS
            }
        )

    return BswResult(
        per_lead=per_lead,
        total_normal=sum(x.total(Label.NORMAL) for x in per_lead.values()),
        total_lvh=sum(x.total(Label.LVH) for x in per_lead.values()),
    )


def r_and_s(beat, window: int = 60) -> Tuple[float, float]:
    """
    R height and S depth around the dominant deflection of a mean beat: R is
    the maximum within `window` samples either side of the largest |value|, S
    the depth of the minimum in the `window` samples from it onwards.
    """
    x = _samples(beat)
    landmark = int(np.argmax(np.abs(x)))
    around = x[max(0, landmark - window) : landmark + window + 1]
    after = x[landmark : landmark + window + 1]
    return max(0.0, float(around.max())), max(0.0, float(-after.min()))


@dataclass(frozen=True)
class VoltageMeasurements:
    S_V1: float = 0.0
    R_V5: float = 0.0
    R_V6: float = 0.0
    R_aVL: float = 0.0


def measure_voltages(
    record_beats: Mapping[LeadId, object], window: int = 60
) -> VoltageMeasurements:
    return VoltageMeasurements(
        S_V1=r_and_s(_lead(record_beats, LeadId.V1), window)[1],
        R_V5=r_and_s(_lead(record_beats, LeadId.V5), window)[0],
        R_V6=r_and_s(_lead(record_beats, LeadId.V6), window)[0],
        R_aVL=r_and_s(_lead(record_beats, LeadId.aVL), window)[0],
    )


@dataclass(frozen=True)
class CriterionResult:
    decision: Label
    value_mv: float


def sokolow_lyon(
    record_beats: Mapping[LeadId, object],
    threshold_mv: float = 3.5,
    window: int = 60,
) -> CriterionResult:
    s_v1 = r_and_s(_lead(record_beats, LeadId.V1), window)[1]
    r_v5 = r_and_s(_lead(record_beats, LeadId.V5), window)[0]
    r_v6 = r_and_s(_lead(record_beats, LeadId.V6), window)[0]
    value = s_v1 + max(r_v5, r_v6)
    return CriterionResult(
        decision=Label.LVH if value > threshold_mv else Label.NORMAL,
        value_mv=value,
    )


def modified_cornell(
    record_beats: Mapping[LeadId, object],
    threshold_mv: float = 1.2,
    window: int = 60,
) -> CriterionResult:
    value = r_and_s(_lead(record_beats, LeadId.aVL), window)[0]
    return CriterionResult(
        decision=Label.LVH if value > threshold_mv else Label.NORMAL,
        value_mv=value,
    )


@dataclass(frozen=True)
class DiagnosisReport:
    record_id: str
    per_lead: Mapping[LeadId, LeadDistances]
    total_normal: float
    total_lvh: float
    bsw_decision: Label
    sokolow_lyon: Label
    cornell: Label
    measured: VoltageMeasurements = field(default_factory=VoltageMeasurements)
    true_label: Label = Label.UNKNOWN
    max_vh: float = float("nan")
    regular: bool = True

    def decision(self, method: str) -> Label:
        return {
            "bsw": self.bsw_decision,
            "sokolow_lyon": self.sokolow_lyon,
            "cornell": self.cornell,
        }[method]

    def to_document(self) -> dict:
        return {
            "record_id": self.record_id,
            "true_label": self.true_label.value,
            "bsw_decision": self.bsw_decision.value,
            "sokolow_lyon": self.sokolow_lyon.value,
            "cornell": self.cornell.value,
            "total_normal": self.total_normal,
            "total_lvh": self.total_lvh,
            "measured": {
                "S_V1": self.measured.S_V1,
                "R_V5": self.measured.R_V5,
                "R_V6": self.measured.R_V6,
                "R_aVL": self.measured.R_aVL,
            },
            "max_vh": self.max_vh if np.isfinite(self.max_vh) else None,
            "regular": self.regular,
            "per_lead": {
                lead.value: {
                    label.value: [
                        {
                            "index": x.index,
                            "distance": x.distance,
                            "occurrence": x.occurrence,
                        }
                        for x in distances.nearest[label]
                    ]
                    for label in CLASS_LABELS
                }
                for lead, distances in self.per_lead.items()
            },
        }

    @classmethod
    def from_document(cls, document: Mapping) -> "DiagnosisReport":
        per_lead = {
            LeadId.parse(lead): LeadDistances(
                nearest={
                    Label.parse(label): tuple(Neighbour(**x) for x in items)
                    for label, items in by_class.items()
                }
            )
            for lead, by_class in document.get("per_lead", {}).items()
        }
        max_vh = document.get("max_vh")
        return cls(
            record_id=document["record_id"],
            per_lead=per_lead,
            total_normal=float(document["total_normal"]),
            total_lvh=float(document["total_lvh"]),
            bsw_decision=Label.parse(document["bsw_decision"]),
            sokolow_lyon=Label.parse(document["sokolow_lyon"]),
            cornell=Label.parse(document["cornell"]),
            measured=VoltageMeasurements(**document.get("measured", {})),
            true_label=Label.parse(document.get("true_label", "Unknown")),
            max_vh=float("nan") if max_vh is None else float(max_vh),
            regular=bool(document.get("regular", True)),
        )


def diagnose(
    record_id: str,
    record_beats: Mapping[LeadId, object],
    libraries: Libraries,
    config: PipelineConfig = PipelineConfig(),
    true_label: Label = Label.UNKNOWN,
    max_vh: float = float("nan"),
) -> DiagnosisReport:
    """Run all three methods on one record's mean beats."""
    diagnosis = config.diagnosis
    bsw = classify_bsw(record_beats, libraries, config.warp, diagnosis)
    window = diagnosis.landmark_window
    return DiagnosisReport(
        record_id=record_id,
        per_lead=bsw.per_lead,
        total_normal=bsw.total_normal,
        total_lvh=bsw.total_lvh,
        bsw_decision=bsw.decision,
        sokolow_lyon=sokolow_lyon(
            record_beats, diagnosis.sokolow_lyon_mv, window
        ).decision,
        cornell=modified_cornell(
            record_beats, diagnosis.cornell_mv, window
        ).decision,
        measured=measure_voltages(record_beats, window),
        true_label=true_label,
        max_vh=max_vh,
        regular=not (max_vh >= config.screening.threshold),
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with LVH as the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("Confusion counts must be nonnegative")

    @classmethod
    def from_labels(
        cls, truth: Iterable[Label], predicted: Iterable[Label]
    ) -> "ConfusionMatrix":
        truth = [Label(x).value for x in truth]
        predicted = [Label(x).value for x in predicted]
        if not truth:
            return cls()
        (tn, fp), (fn, tp) = confusion_matrix(
            truth, predicted, labels=[Label.NORMAL.value, Label.LVH.value]
        )
        return cls(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def sensitivity(self) -> float:
        positives = self.tp + self.fn
        return self.tp / positives if positives else float("nan")

    @property
    def specificity(self) -> float:
        negatives = self.tn + self.fp
        return self.tn / negatives if negatives else float("nan")

    def counts(self) -> np.ndarray:
        """Rows are the true class (Normal, LVH), columns the prediction."""
        return np.array([[self.tn, self.fp], [self.fn, self.tp]], dtype=int)

    def normalized(self) -> np.ndarray:
        counts = self.counts().astype(float)
        rows = counts.sum(axis=1, keepdims=True)
        return np.divide(
            counts, rows, out=np.zeros_like(counts), where=rows > 0
        )

    def as_row(self) -> Dict[str, object]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
        }


def evaluate(
    reports: Iterable[DiagnosisReport],
    methods: Sequence[str] = METHODS,
) -> Dict[str, ConfusionMatrix]:
    """One confusion matrix per method over the reports with a known label."""
    labelled = []
    for report in reports:
        if report.true_label not in CLASS_LABELS:
            logger.warning(
                "stage=evaluate record=%s status=skipped reason=unlabelled",
                report.record_id,
            )
            continue
        labelled.append(report)

    return {
        method: ConfusionMatrix.from_labels(
            (x.true_label for x in labelled),
            (x.decision(method) for x in labelled),
        )
        for method in methods
    }


def self_consistency(
    reports: Iterable[DiagnosisReport],
) -> Optional[float]:
    """
    Share of labelled reports whose own-class total is no larger than the
    other class's total.
    """
    scored = [
        (x.total_normal <= x.total_lvh)
        if x.true_label is Label.NORMAL
        else (x.total_lvh <= x.total_normal)
        for x in reports
        if x.true_label in CLASS_LABELS
    ]
    if not scored:
        return None
    return sum(scored) / len(scored)
