import enum
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from .exceptions import InvalidRecord, LeadCountMismatch, MissingLead


class LeadId(enum.StrEnum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    aVR = "aVR"
    aVL = "aVL"
    aVF = "aVF"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"
    V5 = "V5"
    V6 = "V6"

    @classmethod
    def parse(cls, name: str) -> "LeadId":
        """Resolve a lead name case-insensitively (PTB-XL writes `AVR`)."""
        lookup = {lead.value.lower(): lead for lead in cls}
        try:
            return lookup[name.strip().lower()]
        except KeyError:
            raise ValueError("Unknown lead name {!r}".format(name)) from None


ALL_LEADS = tuple(LeadId)


class Label(enum.StrEnum):
    NORMAL = "Normal"
    LVH = "LVH"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, name: str) -> "Label":
        lookup = {label.value.lower(): label for label in cls}
        try:
            return lookup[name.strip().lower()]
        except KeyError:
            raise ValueError("Unknown label {!r}".format(name)) from None


CLASS_LABELS = (Label.NORMAL, Label.LVH)


def frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EcgRecord:
    """A raw 12-lead recording, amplitudes in millivolts."""

    record_id: str
    sample_rate_hz: float
    leads: Mapping[LeadId, np.ndarray]
    label: Label = Label.UNKNOWN
    duration_samples: int = field(init=False)

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise InvalidRecord(
                "{}: sample rate must be positive, got {}".format(
                    self.record_id, self.sample_rate_hz
                )
            )

        if len(self.leads) != len(ALL_LEADS):
            raise LeadCountMismatch(
                "{}: expected {} leads, got {}".format(
                    self.record_id, len(ALL_LEADS), len(self.leads)
                )
            )

        canonical = {}  # type: Dict[LeadId, np.ndarray]
        for lead in ALL_LEADS:
            if lead not in self.leads:
                raise MissingLead(lead)
            canonical[lead] = frozen_array(self.leads[lead])

        lengths = {len(x) for x in canonical.values()}
        if len(lengths) != 1:
            raise InvalidRecord(
                "{}: leads differ in length {}".format(
                    self.record_id, sorted(lengths)
                )
            )

        (n_samples,) = lengths
        if n_samples < 2 * self.sample_rate_hz:
            raise InvalidRecord(
                "{}: {} samples is shorter than 2 s at {} Hz".format(
                    self.record_id, n_samples, self.sample_rate_hz
                )
            )

        object.__setattr__(self, "leads", canonical)
        object.__setattr__(self, "duration_samples", n_samples)

    def lead(self, lead: LeadId) -> np.ndarray:
        return self.leads[lead]

    def with_leads(self, leads: Mapping[LeadId, np.ndarray]) -> "EcgRecord":
        return EcgRecord(
            record_id=self.record_id,
            sample_rate_hz=self.sample_rate_hz,
            leads=leads,
            label=self.label,
        )

    def with_label(self, label: Label) -> "EcgRecord":
        return EcgRecord(
            record_id=self.record_id,
            sample_rate_hz=self.sample_rate_hz,
            leads=self.leads,
            label=label,
        )
