from typing import Dict, Optional

import faker
import numpy as np

from protowarp.records import ALL_LEADS, EcgRecord, Label, LeadId

fake = faker.Factory.create()
fake.seed_instance(1234)

# Per-lead gains of the synthetic heartbeat; aVR is inverted.
NORMAL_GAINS = {
    LeadId.I: 0.6,
    LeadId.II: 1.0,
    LeadId.III: 0.4,
    LeadId.aVR: -0.8,
    LeadId.aVL: 0.3,
    LeadId.aVF: 0.7,
    LeadId.V1: 0.3,
    LeadId.V2: 0.6,
    LeadId.V3: 0.9,
    LeadId.V4: 1.2,
    LeadId.V5: 1.1,
    LeadId.V6: 0.9,
}

LVH_GAINS = {
    **NORMAL_GAINS,
    LeadId.aVL: 0.9,
    LeadId.V1: 0.5,
    LeadId.V5: 1.9,
    LeadId.V6: 1.6,
}


def make_record_id() -> str:
    return fake.unique.bothify("#####_hr")


def gaussian(t, centre, width, amplitude):
    return amplitude * np.exp(-0.5 * ((t - centre) / width) ** 2)


def make_beat(
    length: int = 500,
    r_amplitude: float = 1.2,
    s_depth: float = 0.35,
    t_amplitude: float = 0.3,
    texture: float = 0.0,
    delay: float = 0.0,
) -> np.ndarray:
    """
    A synthetic heartbeat with P, Q, R, S and T waves, R at the middle.
    `texture` adds a sinusoid of period length/5 so the beat has slope
    everywhere; `delay` shifts the whole beat later by that many samples.
    """
    t = np.arange(length, dtype=float) - delay
    scale = length / 500
    return (
        gaussian(t, 150 * scale, 12 * scale, 0.15)
        + gaussian(t, 235 * scale, 4 * scale, -0.1)
        + gaussian(t, 250 * scale, 6 * scale, r_amplitude)
        + gaussian(t, 265 * scale, 5 * scale, -s_depth)
        + gaussian(t, 360 * scale, 25 * scale, t_amplitude)
        + texture * np.sin(2 * np.pi * t / (100 * scale))
    )


def make_beats(
    n: int,
    noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    **kwargs
) -> np.ndarray:
    rng = rng if rng is not None else np.random.default_rng(0)
    template = make_beat(**kwargs)
    return template + noise * rng.standard_normal((n, template.size))


def make_waveform(
    duration_s: float = 10.0,
    sample_rate_hz: float = 500.0,
    heart_rate_bpm: float = 72.0,
    jitter_s: float = 0.0,
    rng: Optional[np.random.Generator] = None,
):
    """
    A periodic single-lead ECG-like signal and its true R peak positions.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    period = 60.0 / heart_rate_bpm

    peaks = []
    position = 0.5 * period
    while position < duration_s - 0.2:
        peaks.append(position)
        position += period + jitter_s * rng.standard_normal()

    signal = np.zeros(n)
    for peak in peaks:
        signal += (
            gaussian(t, peak - 0.16, 0.020, 0.15)
            + gaussian(t, peak - 0.02, 0.006, -0.1)
            + gaussian(t, peak, 0.010, 1.0)
            + gaussian(t, peak + 0.025, 0.008, -0.3)
            + gaussian(t, peak + 0.25, 0.040, 0.3)
        )
    return signal, np.round(np.asarray(peaks) * sample_rate_hz).astype(int)


def make_record(
    record_id: Optional[str] = None,
    label: Label = Label.NORMAL,
    gains: Optional[Dict[LeadId, float]] = None,
    noise: float = 0.0,
    baseline_wander: float = 0.0,
    seed: int = 0,
    **kwargs
) -> EcgRecord:
    rng = np.random.default_rng(seed)
    if gains is None:
        gains = LVH_GAINS if label is Label.LVH else NORMAL_GAINS

    signal, _ = make_waveform(rng=rng, **kwargs)
    fs = kwargs.get("sample_rate_hz", 500.0)
    t = np.arange(signal.size) / fs

    leads = {}
    for lead in ALL_LEADS:
        lead_signal = gains[lead] * signal
        if baseline_wander:
            lead_signal = lead_signal + baseline_wander * np.sin(
                2 * np.pi * 0.1 * t + rng.uniform(0, 2 * np.pi)
            )
        if noise:
            lead_signal = lead_signal + noise * rng.standard_normal(signal.size)
        leads[lead] = lead_signal

    return EcgRecord(
        record_id=record_id or make_record_id(),
        sample_rate_hz=fs,
        leads=leads,
        label=label,
    )
