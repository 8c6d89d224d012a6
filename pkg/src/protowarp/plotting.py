"""
SVG figures: prototype comparisons, beat overlays, warps, patients and
confusion matrices.

Figures are rendered with the Agg backend and a fixed SVG hash salt and no
date metadata, so the same input always gives the same file.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.patches as patches  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .exceptions import EmptyCurveList, LengthMismatch  # noqa: E402
from .library import Libraries, PrototypeLibraryFile  # noqa: E402
from .records import CLASS_LABELS, Label, LeadId  # noqa: E402
from .warping import WarpResult, interpolate  # noqa: E402

SVG_RC = {
    "svg.hashsalt": "protowarp",
    "svg.fonttype": "none",
    "path.simplify": False,
}

CLASS_COLOURS = {Label.NORMAL: "#1f4e9c", Label.LVH: "#b2182b"}
BAND_COLOURS = {"P": "#a6cee3", "R": "#fdbf6f", "T": "#b2df8a"}


@dataclass(frozen=True, eq=False)
class Curve:
    samples: np.ndarray
    weight: float = 1.0
    label: str = ""


@dataclass(frozen=True)
class WaveBand:
    """A shaded [start, end) sample range, e.g. the P, R or T wave."""

    start: float
    end: float
    name: str = ""


def _save(fig, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _shade(ax, shading: Optional[Sequence[WaveBand]]) -> None:
    if not shading:
        return
    bottom, top = ax.get_ylim()
    for band in shading:
        ax.add_patch(
            patches.Rectangle(
                (band.start, bottom),
                band.end - band.start,
                top - bottom,
                facecolor=BAND_COLOURS.get(band.name, "#cccccc"),
                alpha=0.3,
                linewidth=0,
                zorder=0,
            )
        )


def emit_svg_comparison(
    curves: Sequence[Curve],
    path: Path,
    shading: Optional[Sequence[WaveBand]] = None,
    title: str = "",
    colour: str = "#1f4e9c",
) -> None:
    """
    One line per curve, its opacity the curve's weight relative to the
    heaviest. Each line is written as a `<g id="curve-K">` group.
    """
    if not curves:
        raise EmptyCurveList("Nothing to plot")

    length = np.asarray(curves[0].samples).size
    for curve in curves:
        if np.asarray(curve.samples).size != length:
            raise LengthMismatch(
                "All curves must have {} samples".format(length)
            )

    top = max(float(x.weight) for x in curves)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, curve in enumerate(curves):
        (line,) = ax.plot(
            np.arange(length),
            np.asarray(curve.samples, dtype=float),
            color=colour,
            alpha=float(curve.weight) / top if top > 0 else 1.0,
            linewidth=1.2,
            label=curve.label or None,
        )
        line.set_gid("curve-{}".format(k))

    _shade(ax, shading)
    ax.set_xlabel("sample")
    ax.set_ylabel("mV")
    if title:
        ax.set_title(title)
    _save(fig, path)


def emit_svg_library(library: PrototypeLibraryFile, path: Path) -> None:
    emit_svg_comparison(
        [
            Curve(
                samples=prototype.samples,
                weight=prototype.occurrence,
                label="x{}".format(prototype.occurrence),
            )
            for prototype in library.prototypes
        ],
        path,
        title="{} {} ({} prototypes)".format(
            library.class_label, library.lead, len(library.prototypes)
        ),
        colour=CLASS_COLOURS[library.class_label],
    )


def emit_svg_beats(beats, mean, path: Path, title: str = "") -> None:
    """Every heartbeat in grey, the averaged waveform in red."""
    beats = np.atleast_2d(np.asarray(getattr(beats, "beats", beats), float))
    mean = np.asarray(getattr(mean, "samples", mean), float)
    if beats.shape[1] != mean.size:
        raise LengthMismatch("Beats and mean beat differ in length")

    fig, ax = plt.subplots(figsize=(6, 4))
    t = np.arange(mean.size)
    for beat in beats:
        ax.plot(t, beat, color="#999999", linewidth=0.6, alpha=0.6)
    ax.plot(t, mean, color="#d62728", linewidth=1.6)
    ax.set_xlabel("sample")
    ax.set_ylabel("mV")
    ax.set_title(title or "{} beats".format(beats.shape[0]))
    _save(fig, path)


def emit_svg_warp(
    f,
    g,
    result: WarpResult,
    path: Path,
    shading: Optional[Sequence[WaveBand]] = None,
) -> None:
    """Two beats before and after warping, with the fitted r(t) and s(t)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.size != g.size or result.r.size != f.size:
        raise LengthMismatch("Beats and warp result differ in length")

    t = np.arange(f.size)
    warped, _ = interpolate(g, t + result.s)

    fig, axes = plt.subplots(4, 1, figsize=(6, 9), sharex=True)
    axes[0].plot(t, f, label="f")
    axes[0].plot(t, g, label="g")
    axes[0].set_title("before")
    axes[1].plot(t, result.r * f, label="r f")
    axes[1].plot(t, warped, label="g(t + s)")
    axes[1].set_title("after (loss {:.4g})".format(result.loss))
    axes[2].plot(t, result.r, color="#555555")
    axes[2].set_ylabel("r(t)")
    axes[3].plot(t, result.s, color="#555555")
    axes[3].set_ylabel("s(t)")
    axes[3].set_xlabel("sample")
    for ax in axes[:2]:
        ax.legend(loc="upper right")
        _shade(ax, shading)
    _save(fig, path)


def emit_svg_patient(
    report,
    record_beats: Mapping[LeadId, object],
    libraries: Libraries,
    path: Path,
) -> None:
    """Per decision lead, the patient's mean beat and its nearest prototypes."""
    leads = list(report.per_lead)
    if not leads:
        raise EmptyCurveList("Report has no per-lead distances")

    fig, axes = plt.subplots(
        len(leads), 1, figsize=(6, 3 * len(leads)), squeeze=False
    )
    for ax, lead in zip(axes[:, 0], leads):
        beat = np.asarray(
            getattr(record_beats[lead], "samples", record_beats[lead]), float
        )
        t = np.arange(beat.size)
        for label in CLASS_LABELS:
            prototypes = libraries.prototypes(label, lead)
            nearest = report.per_lead[lead].nearest[label]
            for neighbour in dict.fromkeys(nearest):
                ax.plot(
                    t,
                    prototypes[neighbour.index].samples,
                    color=CLASS_COLOURS[label],
                    linewidth=1.0,
                    alpha=0.7,
                    label="{} #{} d={:.3f}".format(
                        label, neighbour.index, neighbour.distance
                    ),
                )
        ax.plot(t, beat, color="black", linewidth=1.6, label="patient")
        ax.set_title("{} lead {}".format(report.record_id, lead))
        ax.legend(loc="upper right", fontsize="x-small")
    axes[-1, 0].set_xlabel("sample")
    _save(fig, path)


def emit_svg_confusion(matrices: Mapping[str, object], path: Path) -> None:
    """Row-normalized confusion matrices side by side."""
    if not matrices:
        raise EmptyCurveList("No confusion matrices to plot")

    names = [x.value for x in CLASS_LABELS]
    fig, axes = plt.subplots(
        1, len(matrices), figsize=(4 * len(matrices), 4), squeeze=False
    )
    for ax, (method, matrix) in zip(axes[0], matrices.items()):
        normalized = matrix.normalized()
        ax.imshow(normalized, vmin=0, vmax=1, cmap="Blues")
        for (i, j), value in np.ndenumerate(normalized):
            ax.text(
                j,
                i,
                "{:.2f}".format(value),
                ha="center",
                va="center",
                color="white" if value > 0.5 else "black",
            )
        ax.set_xticks([0, 1], labels=names)
        ax.set_yticks([0, 1], labels=names)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        ax.set_title(method)
    _save(fig, path)
