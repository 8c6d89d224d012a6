"""
From raw leads to one averaged heartbeat per lead.

Each lead is high-pass filtered to remove baseline wander, R peaks are found
on a composite of the leads whose R waves point upwards (minus aVR, whose R
wave points down), every lead is cut midpoint-to-midpoint around the peaks,
the beats are resampled to a fixed length and averaged.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy import signal

from .exceptions import (
    CutoffOutOfRange,
    InvalidRecord,
    NotEnoughBeats,
    SignalTooShort,
)
from .records import ALL_LEADS, EcgRecord, LeadId, frozen_array
from .settings import PreprocessConfig

logger = logging.getLogger(__name__)

UPWARD_LEADS = (LeadId.I, LeadId.II, LeadId.V4, LeadId.V5, LeadId.V6)
DOWNWARD_LEADS = (LeadId.aVR,)


@dataclass(frozen=True, eq=False)
class BeatSet:
    """All resampled heartbeats of one lead, shape (n, T)."""

    lead: LeadId
    beats: np.ndarray

    def __post_init__(self):
        beats = np.atleast_2d(np.array(self.beats, dtype=float))
        if beats.shape[0] < 1:
            raise NotEnoughBeats("{}: no beats".format(self.lead))
        beats.setflags(write=False)
        object.__setattr__(self, "beats", beats)

    @property
    def n(self) -> int:
        return self.beats.shape[0]

    @property
    def length(self) -> int:
        return self.beats.shape[1]

    def scaled(self, factor: float) -> "BeatSet":
        return BeatSet(self.lead, self.beats * factor)


@dataclass(frozen=True, eq=False)
class MeanBeat:
    record_id: str
    lead: LeadId
    samples: np.ndarray
    n_beats_averaged: int

    def __post_init__(self):
        if self.n_beats_averaged < 2:
            raise NotEnoughBeats(
                "{} {}: a mean beat needs at least 2 beats, got {}".format(
                    self.record_id, self.lead, self.n_beats_averaged
                )
            )
        object.__setattr__(self, "samples", frozen_array(self.samples))


@dataclass(frozen=True, eq=False)
class PreprocessedRecord:
    """Beat sets and mean beats for all 12 leads of one record."""

    record: EcgRecord
    r_peaks: np.ndarray
    beat_sets: Dict[LeadId, BeatSet]
    mean_beats: Dict[LeadId, MeanBeat]

    @property
    def record_id(self) -> str:
        return self.record.record_id


def highpass_baseline(
    samples: Sequence[float],
    sample_rate_hz: float,
    cutoff_hz: float = 0.5,
    order: int = 4,
) -> np.ndarray:
    """
    Zero-phase Butterworth high-pass. The order-`order` second-order-sections
    design runs forward then backward, so the magnitude response is squared.
    """
    samples = np.asarray(samples, dtype=float)

    if not 0 < cutoff_hz < sample_rate_hz / 2:
        raise CutoffOutOfRange(
            "Cutoff {} Hz outside (0, {}) Hz".format(
                cutoff_hz, sample_rate_hz / 2
            )
        )
    padlen = 3 * order
    if samples.size <= padlen:
        raise SignalTooShort(
            "{} samples; the filter needs more than {}".format(
                samples.size, padlen
            )
        )

    sos = signal.butter(
        order, cutoff_hz, btype="highpass", fs=sample_rate_hz, output="sos"
    )
    return signal.sosfiltfilt(sos, samples, padlen=padlen)


def filter_record(
    record: EcgRecord, config: PreprocessConfig = PreprocessConfig()
) -> EcgRecord:
    return record.with_leads(
        {
            lead: highpass_baseline(
                record.lead(lead),
                record.sample_rate_hz,
                cutoff_hz=config.highpass_cutoff_hz,
                order=config.highpass_order,
            )
            for lead in ALL_LEADS
        }
    )


def composite_lead(record: EcgRecord) -> np.ndarray:
    """I + II + V4 + V5 + V6 - aVR, sample by sample."""
    composite = np.zeros(record.duration_samples)
    for lead in UPWARD_LEADS:
        composite = composite + record.lead(lead)
    for lead in DOWNWARD_LEADS:
        composite = composite - record.lead(lead)
    return composite


def detect_r_peaks(
    composite: Sequence[float],
    sample_rate_hz: float,
    config: PreprocessConfig = PreprocessConfig(),
) -> np.ndarray:
    """
    Energy-based R detector: band-pass, square, integrate over a moving window,
    accept integrated peaks above `threshold_ratio` times the running mean of
    the last accepted peak heights, then move each detection to the maximum of
    the raw composite nearby.
    """
    composite = np.asarray(composite, dtype=float)
    fs = sample_rate_hz

    if composite.size < 2 * fs:
        raise SignalTooShort(
            "R detection needs at least 2 s of signal, got {} samples".format(
                composite.size
            )
        )

    sos = signal.butter(
        config.band_order,
        [config.band_low_hz, config.band_high_hz],
        btype="bandpass",
        fs=fs,
        output="sos",
    )
    energy = signal.sosfiltfilt(sos, composite) ** 2

    window = max(1, int(round(config.integration_window_s * fs)))
    integrated = np.convolve(energy, np.ones(window) / window, mode="same")

    refractory = max(1, int(round(config.refractory_s * fs)))
    candidates, properties = signal.find_peaks(
        integrated, height=np.finfo(float).tiny, distance=refractory
    )
    heights = properties["peak_heights"]

    learning = integrated[: max(1, int(round(config.learning_period_s * fs)))]
    history = [float(learning.max())]

    accepted = []  # type: List[int]
    for index, height in zip(candidates, heights):
        threshold = config.threshold_ratio * np.mean(
            history[-config.threshold_history :]
        )
        if height <= threshold:
            continue
        if accepted and index - accepted[-1] < refractory:
            continue
        accepted.append(int(index))
        history.append(float(height))

    radius = max(1, int(round(config.refine_window_s * fs)))
    peaks = []  # type: List[int]
    for index in accepted:
        lo = max(0, index - radius)
        hi = min(composite.size, index + radius + 1)
        refined = lo + int(np.argmax(composite[lo:hi]))
        if peaks and refined - peaks[-1] < refractory:
            continue
        peaks.append(refined)

    if len(peaks) < 3:
        raise NotEnoughBeats(
            "Found {} R peaks; at least 3 are needed".format(len(peaks))
        )

    return np.asarray(peaks, dtype=int)


def resample(segment: np.ndarray, length: int) -> np.ndarray:
    positions = np.linspace(0, segment.size - 1, length)
    return np.interp(positions, np.arange(segment.size), segment)


def segment_beats(
    lead_signal: Sequence[float],
    r_peaks: Sequence[int],
    lead: LeadId = LeadId.II,
    beat_length: int = 500,
) -> BeatSet:
    """
    Cut one beat per interior peak, from the midpoint with the previous peak
    to the midpoint with the next, and resample each to `beat_length`.
    """
    lead_signal = np.asarray(lead_signal, dtype=float)
    peaks = np.asarray(r_peaks, dtype=int)

    if peaks.size < 3:
        raise NotEnoughBeats(
            "{}: {} R peaks give no complete beat".format(lead, peaks.size)
        )

    beats = []
    for k in range(1, peaks.size - 1):
        start = (peaks[k - 1] + peaks[k]) // 2
        stop = (peaks[k] + peaks[k + 1]) // 2
        segment = lead_signal[start:stop]
        if segment.size < 2:
            raise InvalidRecord(
                "{}: degenerate beat between samples {} and {}".format(
                    lead, start, stop
                )
            )
        beats.append(resample(segment, beat_length))

    return BeatSet(lead=lead, beats=np.vstack(beats))


def mean_beat(beats: BeatSet, record_id: str = "") -> MeanBeat:
    if beats.n < 2:
        raise NotEnoughBeats(
            "{} {}: a mean beat needs at least 2 beats, got {}".format(
                record_id, beats.lead, beats.n
            )
        )
    return MeanBeat(
        record_id=record_id,
        lead=beats.lead,
        samples=beats.beats.mean(axis=0),
        n_beats_averaged=beats.n,
    )


def preprocess_record(
    record: EcgRecord, config: PreprocessConfig = PreprocessConfig()
) -> PreprocessedRecord:
    filtered = filter_record(record, config)
    peaks = detect_r_peaks(
        composite_lead(filtered), record.sample_rate_hz, config
    )

    beat_sets = {}
    mean_beats = {}
    for lead in ALL_LEADS:
        beat_sets[lead] = segment_beats(
            filtered.lead(lead),
            peaks,
            lead=lead,
            beat_length=config.beat_length,
        )
        mean_beats[lead] = mean_beat(beat_sets[lead], record.record_id)

    logger.debug(
        "record=%s peaks=%d beats=%d",
        record.record_id,
        peaks.size,
        beat_sets[LeadId.II].n,
    )

    return PreprocessedRecord(
        record=record,
        r_peaks=peaks,
        beat_sets=beat_sets,
        mean_beats=mean_beats,
    )
