"""
Ingestion of raw 12-lead recordings.

WFDB support covers the subset PTB-XL ships: single-segment records, one
format-16 signal file per record. Everything else is rejected explicitly.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
import wfdb

from .exceptions import (
    DuplicateLead,
    LeadCountMismatch,
    MalformedHeader,
    MissingLead,
    MissingSignalFile,
    NonNumericCell,
    RaggedRows,
    UnsupportedFormat,
)
from .records import ALL_LEADS, EcgRecord, Label, LeadId

logger = logging.getLogger(__name__)

SUPPORTED_WFDB_FORMATS = {"16"}
MICROVOLT_UNITS = {"uv", "µv", "microvolt"}


def record_name_from_path(path: Path) -> Path:
    return path.with_suffix("") if path.suffix == ".hea" else path


def read_wfdb(header_path: Path, label: Label = Label.UNKNOWN) -> EcgRecord:
    record_name = record_name_from_path(Path(header_path))

    try:
        header = wfdb.rdheader(str(record_name))
    except FileNotFoundError:
        raise
    except Exception as e:
        raise MalformedHeader(
            "{}: cannot parse header ({})".format(record_name, e)
        ) from e

    if isinstance(header, wfdb.MultiRecord):
        raise UnsupportedFormat(
            "{}: multi-segment records are not supported".format(record_name)
        )

    if header.n_sig != len(ALL_LEADS):
        raise LeadCountMismatch(
            "{}: expected {} leads, header declares {}".format(
                record_name, len(ALL_LEADS), header.n_sig
            )
        )

    formats = set(header.fmt or [])
    if not formats or not formats <= SUPPORTED_WFDB_FORMATS:
        raise UnsupportedFormat(
            "{}: unsupported storage format(s) {}".format(
                record_name, sorted(formats)
            )
        )

    signal_files = set(header.file_name or [])
    if len(signal_files) != 1:
        raise UnsupportedFormat(
            "{}: expected one signal file, got {}".format(
                record_name, sorted(signal_files)
            )
        )
    (signal_file,) = signal_files
    if not (record_name.parent / signal_file).exists():
        raise MissingSignalFile(
            "{}: companion signal file {} not found".format(
                record_name, signal_file
            )
        )

    record = wfdb.rdrecord(str(record_name), physical=False, return_res=64)
    digital = np.asarray(record.d_signal, dtype=float)

    leads = {}  # type: Dict[LeadId, np.ndarray]
    for column, name in enumerate(record.sig_name):
        try:
            lead = LeadId.parse(name)
        except ValueError as e:
            raise MalformedHeader("{}: {}".format(record_name, e)) from e
        if lead in leads:
            raise DuplicateLead(lead)

        gain = float(record.adc_gain[column])
        baseline = float(record.baseline[column])
        samples = (digital[:, column] - baseline) / gain
        if (record.units[column] or "").strip().lower() in MICROVOLT_UNITS:
            samples = samples / 1000.0
        leads[lead] = samples

    for lead in ALL_LEADS:
        if lead not in leads:
            raise MissingLead(lead)

    return EcgRecord(
        record_id=record_name.name,
        sample_rate_hz=float(record.fs),
        leads=leads,
        label=label,
    )


def read_csv(
    path: Path, sample_rate_hz: float, label: Label = Label.UNKNOWN
) -> EcgRecord:
    """
    Read a CSV with one column per lead (header row of lead names) and one row
    per sample, values in millivolts.
    """
    path = Path(path)

    with path.open(newline="") as f:
        header = next(csv.reader(f), [])

    columns = {}  # type: Dict[LeadId, str]
    for column in header:
        try:
            lead = LeadId.parse(column)
        except ValueError:
            logger.debug("Ignoring non-lead column %r in %s", column, path)
            continue
        if lead in columns:
            raise DuplicateLead(lead)
        columns[lead] = column

    for lead in ALL_LEADS:
        if lead not in columns:
            raise MissingLead(lead)

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            na_filter=False,
            skip_blank_lines=True,
            on_bad_lines="error",
        )
    except pd.errors.ParserError as e:
        raise RaggedRows("{}: {}".format(path, e)) from e

    leads = {}
    for lead, column in columns.items():
        raw = frame[column]
        if raw.isna().any():
            row = int(np.flatnonzero(raw.isna().to_numpy())[0])
            raise RaggedRows("{}: row {} is missing {}".format(path, row, lead))

        values = pd.to_numeric(raw.str.strip(), errors="coerce")
        if values.isna().any():
            row = int(np.flatnonzero(values.isna().to_numpy())[0])
            raise NonNumericCell(
                "{}: non-numeric value {!r} in column {} row {}".format(
                    path, raw.iloc[row], lead, row
                )
            )
        leads[lead] = values.to_numpy(dtype=float)

    return EcgRecord(
        record_id=path.stem,
        sample_rate_hz=float(sample_rate_hz),
        leads=leads,
        label=label,
    )


def write_csv(record: EcgRecord, path: Path) -> None:
    frame = pd.DataFrame(
        {lead.value: record.lead(lead) for lead in ALL_LEADS},
        columns=[lead.value for lead in ALL_LEADS],
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")


def read_labels(path: Optional[Path]) -> Dict[str, Label]:
    """Read a `record_id,label` sidecar mapping records to classes."""
    if not path:
        return {}

    frame = pd.read_csv(path, dtype=str)
    missing = {"record_id", "label"} - set(frame.columns)
    if missing:
        raise MalformedHeader(
            "{}: label file lacks column(s) {}".format(path, sorted(missing))
        )

    return {
        str(record_id).strip(): Label.parse(label)
        for record_id, label in zip(frame["record_id"], frame["label"])
    }


def find_records(src: Path, input_format: str = "auto"):
    """
    Enumerate readable record paths under `src`, sorted by name so that batch
    order is deterministic.
    """
    patterns = {
        "wfdb": ("*.hea",),
        "csv": ("*.csv",),
        "auto": ("*.hea", "*.csv"),
    }[input_format]

    return sorted(
        path
        for pattern in patterns
        for path in src.rglob(pattern)
        if not path.name.startswith(".")
    )


def read_record(
    path: Path, sample_rate_hz: float, label: Label = Label.UNKNOWN
) -> EcgRecord:
    if path.suffix == ".csv":
        return read_csv(path, sample_rate_hz, label=label)
    return read_wfdb(path, label=label)
