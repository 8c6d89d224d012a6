import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .diagnosis import ConfusionMatrix, DiagnosisReport, diagnose, evaluate
from .exceptions import EmptyClassPool, NoRecordsFound
from .library import Libraries, PrototypeLibraryFile, load_library, save_library
from .plotting import (
    emit_svg_beats,
    emit_svg_confusion,
    emit_svg_library,
    emit_svg_patient,
    emit_svg_warp,
)
from .preprocess import preprocess_record
from .prototypes import balance_pools, build_all_libraries
from .readers import find_records, read_labels, read_record
from .records import ALL_LEADS, CLASS_LABELS, Label, LeadId
from .screening import VariabilityReport, screen_record
from .settings import PipelineConfig
from .storage import (
    CONFUSION_FILENAME,
    SCREENING_FILENAME,
    BeatBundle,
    find_bundles,
    load_bundle,
    load_reports,
    load_screening,
    save_bundle,
    save_confusion,
    save_report,
    save_screening,
)
from .utils import log_event, parallel_imap, progress
from .warping import warp

logger = logging.getLogger(__name__)

# Seed stream of the held-out split, independent of the library build.
HOLDOUT_STREAM = 1


@dataclass
class BatchSummary:
    ok: List[str] = field(default_factory=list)
    failed: Dict[str, str] = field(default_factory=dict)


def _preprocess_one(args) -> Tuple[str, int]:
    path, dest, label, config = args
    record = read_record(path, config.io.sample_rate_hz, label=label)
    processed = preprocess_record(record, config.preprocess)
    save_bundle(BeatBundle.from_preprocessed(processed), dest)
    return record.record_id, processed.beat_sets[LeadId.II].n


def _preprocess_job(args):
    path = args[0]
    try:
        record_id, n_beats = _preprocess_one(args)
    except (ValueError, OSError) as e:
        return path.stem, None, "{}: {}".format(type(e).__name__, e)
    return record_id, n_beats, None


def preprocess_records(
    src: Path,
    dest: Path,
    config: PipelineConfig = PipelineConfig(),
    labels_file: Optional[Path] = None,
) -> BatchSummary:
    """
    Read every record under `src` and write one beat bundle per record to
    `dest`. Records that fail are logged and skipped.
    """
    src = Path(src)
    if not src.is_dir():
        raise NoRecordsFound("{} is not a readable directory".format(src))

    paths = find_records(src, config.io.input_format)
    if not paths:
        raise NoRecordsFound("no records found in {}".format(src))

    labels_file = labels_file or (
        Path(config.io.labels_file) if config.io.labels_file else None
    )
    labels = read_labels(labels_file)

    jobs = [
        (path, Path(dest), labels.get(path.stem, Label.UNKNOWN), config)
        for path in paths
    ]

    summary = BatchSummary()
    bar = progress(
        parallel_imap(_preprocess_job, jobs, config.workers),
        total=len(jobs),
        desc="preprocess",
    )
    for record_id, n_beats, error in bar:
        bar.set_postfix({"record": record_id})
        if error is None:
            summary.ok.append(record_id)
            log_event(
                logger,
                logging.DEBUG,
                stage="preprocess",
                record=record_id,
                status="ok",
                beats=n_beats,
            )
        else:
            summary.failed[record_id] = error
            log_event(
                logger,
                logging.WARNING,
                stage="preprocess",
                record=record_id,
                status="failed",
                error=error,
            )

    log_event(
        logger,
        stage="preprocess",
        records=len(jobs),
        ok=len(summary.ok),
        failed=len(summary.failed),
    )
    return summary


def load_bundles(
    src: Path, labels_file: Optional[Path] = None
) -> List[BeatBundle]:
    paths = find_bundles(src)
    if not paths:
        raise NoRecordsFound("no beat bundles found in {}".format(src))

    labels = read_labels(labels_file)
    bundles = []
    for path in progress(paths, desc="load", leave=False):
        bundle = load_bundle(path)
        if bundle.record_id in labels:
            bundle = bundle.with_label(labels[bundle.record_id])
        bundles.append(bundle)
    return bundles


def screen_bundles(
    bundles: Sequence[BeatBundle],
    dest: Path,
    config: PipelineConfig = PipelineConfig(),
) -> List[VariabilityReport]:
    threshold = config.screening.threshold
    reports = []
    bar = progress(bundles, desc="screen")
    for bundle in bar:
        bar.set_postfix({"record": bundle.record_id})
        report = screen_record(bundle.record_id, bundle.beat_sets, threshold)
        log_event(
            logger,
            logging.DEBUG if report.eligible else logging.INFO,
            stage="screen",
            record=bundle.record_id,
            max_vh="{:.4f}".format(report.max_vh),
            eligible=report.eligible,
        )
        reports.append(report)

    save_screening(reports, Path(dest) / SCREENING_FILENAME)
    log_event(
        logger,
        stage="screen",
        records=len(reports),
        eligible=sum(x.eligible for x in reports),
    )
    return reports


def eligibility(
    bundles: Sequence[BeatBundle],
    config: PipelineConfig,
    screening_file: Optional[Path] = None,
) -> Dict[str, bool]:
    """
    Regularity of every bundle: from a saved screening table when one is
    given, otherwise screened on the fly.
    """
    if screening_file is not None and Path(screening_file).exists():
        saved = load_screening(screening_file)
        threshold = config.screening.threshold
        return {
            x.record_id: (
                x.record_id in saved and saved[x.record_id].max_vh < threshold
            )
            for x in bundles
        }

    return {
        x.record_id: screen_record(
            x.record_id, x.beat_sets, config.screening.threshold
        ).eligible
        for x in bundles
    }


def build_libraries(
    bundles: Sequence[BeatBundle],
    dest: Path,
    config: PipelineConfig = PipelineConfig(),
    screening_file: Optional[Path] = None,
) -> List[PrototypeLibraryFile]:
    """
    Select the prototype donors of each class, build the 12 x 2 libraries and
    save them to `dest`.
    """
    eligible = eligibility(bundles, config, screening_file)
    by_id = {x.record_id: x for x in bundles}

    pools: Dict[Label, List[str]] = {label: [] for label in CLASS_LABELS}
    for bundle in bundles:
        if bundle.label in pools and eligible[bundle.record_id]:
            pools[bundle.label].append(bundle.record_id)

    for label, ids in pools.items():
        if not ids:
            raise EmptyClassPool(
                "No eligible {} records to build libraries from".format(label)
            )

    rng = np.random.default_rng(config.rng_seed)
    selected = balance_pools(pools, config.strategies, rng)
    for label, ids in selected.items():
        log_event(
            logger,
            stage="build",
            **{"class": label},
            eligible=len(pools[label]),
            selected=len(ids),
        )

    records_by_class = {
        label: [by_id[x].mean_beats for x in ids]
        for label, ids in selected.items()
    }  # type: Dict[Label, List[Mapping[LeadId, object]]]

    libraries = build_all_libraries(
        records_by_class,
        config.warp,
        config.prototype,
        workers=config.workers,
        progress=progress,
    )
    save_library(libraries, Path(dest))
    return libraries


def _diagnose_job(args) -> DiagnosisReport:
    bundle, libraries, config = args
    screening = screen_record(
        bundle.record_id, bundle.beat_sets, config.screening.threshold
    )
    return diagnose(
        bundle.record_id,
        bundle.mean_beats,
        libraries,
        config,
        true_label=bundle.label,
        max_vh=screening.max_vh,
    )


def holdout_split(
    bundles: Sequence[BeatBundle],
    libraries: Libraries,
    per_class: int,
    config: PipelineConfig = PipelineConfig(),
) -> List[BeatBundle]:
    """
    Draw up to `per_class` labelled bundles per class, leaving out every record
    that contributed to a prototype.
    """
    excluded = libraries.lineage()
    rng = np.random.default_rng([config.rng_seed, HOLDOUT_STREAM])

    chosen = []
    for label in CLASS_LABELS:
        pool = sorted(
            (
                x
                for x in bundles
                if x.label is label and x.record_id not in excluded
            ),
            key=lambda x: x.record_id,
        )
        if len(pool) > per_class:
            indices = sorted(
                rng.choice(len(pool), size=per_class, replace=False)
            )
            pool = [pool[i] for i in indices]
        log_event(
            logger, stage="diagnose", **{"class": label}, held_out=len(pool)
        )
        chosen.extend(pool)
    return sorted(chosen, key=lambda x: x.record_id)


def diagnose_bundles(
    bundles: Sequence[BeatBundle],
    libraries: Libraries,
    dest: Path,
    config: PipelineConfig = PipelineConfig(),
    plots: bool = False,
) -> List[DiagnosisReport]:
    jobs = [(x, libraries, config) for x in bundles]
    by_id = {x.record_id: x for x in bundles}

    reports = []
    bar = progress(
        parallel_imap(_diagnose_job, jobs, config.workers),
        total=len(jobs),
        desc="diagnose",
    )
    for report in bar:
        bar.set_postfix({"record": report.record_id})
        save_report(report, dest)
        if plots:
            emit_svg_patient(
                report,
                by_id[report.record_id].mean_beats,
                libraries,
                Path(dest) / "reports" / "{}.svg".format(report.record_id),
            )
        log_event(
            logger,
            stage="diagnose",
            record=report.record_id,
            bsw=report.bsw_decision,
            sokolow_lyon=report.sokolow_lyon,
            cornell=report.cornell,
            regular=report.regular,
        )
        reports.append(report)
    return reports


def evaluate_reports(src: Path, dest: Path) -> Dict[str, ConfusionMatrix]:
    reports = load_reports(src)
    if not reports:
        raise NoRecordsFound("no diagnosis reports found in {}".format(src))

    matrices = evaluate(reports)
    save_confusion(matrices, Path(dest) / CONFUSION_FILENAME)
    emit_svg_confusion(matrices, Path(dest) / "confusion.svg")
    for method, matrix in matrices.items():
        log_event(
            logger,
            stage="evaluate",
            method=method,
            total=matrix.total,
            sensitivity="{:.3f}".format(matrix.sensitivity),
            specificity="{:.3f}".format(matrix.specificity),
        )
    return matrices


def plot_libraries(library_path: Path, dest: Path) -> List[Path]:
    """One SVG per (class, lead) library."""
    written = []
    for library in progress(Libraries(load_library(library_path)), desc="plot"):
        path = Path(dest) / "{}_{}.svg".format(
            library.class_label.value, library.lead.value
        )
        emit_svg_library(library, path)
        written.append(path)
    return written


def plot_beats(bundle_path: Path, dest: Path, leads=ALL_LEADS) -> List[Path]:
    bundle = load_bundle(bundle_path)
    written = []
    for lead in leads:
        path = Path(dest) / "{}_{}_beats.svg".format(
            bundle.record_id, lead.value
        )
        emit_svg_beats(
            bundle.beat_sets[lead],
            bundle.mean_beats[lead],
            path,
            title="{} lead {}".format(bundle.record_id, lead),
        )
        written.append(path)
    return written


def plot_warp(
    first: Path,
    second: Path,
    lead: LeadId,
    dest: Path,
    config: PipelineConfig = PipelineConfig(),
) -> Path:
    f = load_bundle(first)
    g = load_bundle(second)
    result = warp(
        f.mean_beats[lead].samples, g.mean_beats[lead].samples, config.warp
    )
    path = Path(dest) / "warp_{}_{}_{}.svg".format(
        f.record_id, g.record_id, lead.value
    )
    emit_svg_warp(
        f.mean_beats[lead].samples, g.mean_beats[lead].samples, result, path
    )
    log_event(
        logger,
        stage="plot",
        warp="{}->{}".format(f.record_id, g.record_id),
        lead=lead,
        loss="{:.6g}".format(result.loss),
        iters=result.iters,
    )
    return path
