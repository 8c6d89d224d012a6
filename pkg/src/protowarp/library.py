"""
Prototype libraries and their on-disk form.

A library file holds every (class, lead) library of one build as a JSON
document keyed by class then lead; see docs/format.md.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .exceptions import (
    BeatLengthMismatch,
    EmptyLibrary,
    FormatVersionMismatch,
    InvalidOccurrence,
)
from .records import CLASS_LABELS, Label, LeadId, frozen_array
from .utils import atomic_write

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Prototype:
    samples: np.ndarray
    occurrence: int
    lineage: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "samples", frozen_array(self.samples))
        object.__setattr__(self, "lineage", tuple(self.lineage))
        if self.occurrence < 1:
            raise InvalidOccurrence(
                "occurrence must be >= 1, got {}".format(self.occurrence)
            )
        if self.lineage and len(self.lineage) != self.occurrence:
            raise InvalidOccurrence(
                "occurrence {} does not match lineage of {} records".format(
                    self.occurrence, len(self.lineage)
                )
            )

    @classmethod
    def from_beat(cls, samples, record_id: str) -> "Prototype":
        return cls(samples=samples, occurrence=1, lineage=(record_id,))


@dataclass(frozen=True, eq=False)
class PrototypeLibraryFile:
    lead: LeadId
    class_label: Label
    prototypes: Tuple[Prototype, ...]
    beat_length: int = 500
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "lead", LeadId.parse(self.lead))
        object.__setattr__(self, "class_label", Label.parse(self.class_label))
        object.__setattr__(self, "prototypes", tuple(self.prototypes))
        if self.class_label not in CLASS_LABELS:
            raise ValueError(
                "Library class must be Normal or LVH, got {}".format(
                    self.class_label
                )
            )
        for prototype in self.prototypes:
            if prototype.samples.size != self.beat_length:
                raise BeatLengthMismatch(
                    "{} {}: prototype has {} samples, beat_length is {}".format(
                        self.class_label,
                        self.lead,
                        prototype.samples.size,
                        self.beat_length,
                    )
                )

    @property
    def key(self) -> Tuple[Label, LeadId]:
        return (self.class_label, self.lead)

    @property
    def total_occurrence(self) -> int:
        return sum(x.occurrence for x in self.prototypes)


class Libraries:
    """The collection of libraries of one build, indexed by (class, lead)."""

    def __init__(self, libraries: Iterable[PrototypeLibraryFile] = ()):
        self._libraries: Dict[Tuple[Label, LeadId], PrototypeLibraryFile] = {}
        for library in libraries:
            self._libraries[library.key] = library

    def __iter__(self):
        return iter(
            self._libraries[key]
            for key in sorted(
                self._libraries,
                key=lambda k: (k[0].value, list(LeadId).index(k[1])),
            )
        )

    def __len__(self):
        return len(self._libraries)

    def get(
        self, class_label: Label, lead: LeadId
    ) -> Optional[PrototypeLibraryFile]:
        return self._libraries.get((class_label, lead))

    def prototypes(
        self, class_label: Label, lead: LeadId
    ) -> Tuple[Prototype, ...]:
        library = self.get(class_label, lead)
        if library is None or not library.prototypes:
            raise EmptyLibrary(
                "No {} prototypes for lead {}".format(class_label, lead)
            )
        return library.prototypes

    def lineage(self) -> set:
        return {
            record_id
            for library in self
            for prototype in library.prototypes
            for record_id in prototype.lineage
        }


def library_to_document(libraries: Iterable[PrototypeLibraryFile]) -> dict:
    libraries = list(libraries)
    beat_lengths = {x.beat_length for x in libraries}
    if len(beat_lengths) > 1:
        raise BeatLengthMismatch(
            "Libraries disagree on beat length: {}".format(sorted(beat_lengths))
        )

    document = {
        "format_version": FORMAT_VERSION,
        "beat_length": beat_lengths.pop() if beat_lengths else 500,
        "libraries": {},
    }  # type: dict
    for library in libraries:
        by_lead = document["libraries"].setdefault(
            library.class_label.value, {}
        )
        by_lead[library.lead.value] = {
            "prototypes": [
                {
                    "occurrence": int(prototype.occurrence),
                    "lineage": list(prototype.lineage),
                    "samples": [float(x) for x in prototype.samples],
                }
                for prototype in library.prototypes
            ]
        }
    return document


def library_from_document(document: dict) -> List[PrototypeLibraryFile]:
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            "Library format version {!r}, expected {}".format(
                version, FORMAT_VERSION
            )
        )

    beat_length = int(document["beat_length"])
    libraries = []
    for class_name, by_lead in document.get("libraries", {}).items():
        for lead_name, entry in by_lead.items():
            prototypes = []
            for item in entry["prototypes"]:
                occurrence = item["occurrence"]
                if not isinstance(occurrence, int) or occurrence <= 0:
                    raise InvalidOccurrence(
                        "{} {}: occurrence must be positive, got {!r}".format(
                            class_name, lead_name, occurrence
                        )
                    )
                samples = item["samples"]
                if len(samples) != beat_length:
                    raise BeatLengthMismatch(
                        "{} {}: {} samples, declared beat_length {}".format(
                            class_name, lead_name, len(samples), beat_length
                        )
                    )
                prototypes.append(
                    Prototype(
                        samples=samples,
                        occurrence=occurrence,
                        lineage=tuple(item.get("lineage", ())),
                    )
                )
            libraries.append(
                PrototypeLibraryFile(
                    lead=LeadId.parse(lead_name),
                    class_label=Label.parse(class_name),
                    prototypes=tuple(prototypes),
                    beat_length=beat_length,
                )
            )
    return libraries


def save_library(libraries: Iterable[PrototypeLibraryFile], path: Path) -> None:
    document = library_to_document(libraries)
    with atomic_write(Path(path)) as f:
        json.dump(document, f, indent=2)
        f.write("\n")


def load_library(path: Path) -> List[PrototypeLibraryFile]:
    with Path(path).open() as f:
        return library_from_document(json.load(f))
