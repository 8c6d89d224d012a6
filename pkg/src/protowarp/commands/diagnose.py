import argparse
from pathlib import Path

from ..engine import diagnose_bundles, holdout_split, load_bundles
from ..library import Libraries, load_library
from ..storage import LIBRARY_FILENAME
from .base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Diagnose records against the prototype libraries."

    def add_arguments(self, parser):
        parser.add_argument(
            "src",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Directory holding the beat bundles, or one bundle file",
            default=Path("./protowarp-out"),
        )
        parser.add_argument(
            "--library",
            type=Path,
            help="Library file (defaults to src/library.json).",
        )
        self.add_out_argument(
            parser, "Where to write reports/ (defaults to src)."
        )
        parser.add_argument(
            "--labels",
            type=Path,
            help="CSV of record_id,label pairs for unlabelled bundles.",
        )
        parser.add_argument(
            "--holdout",
            action="store_true",
            help="Diagnose a seeded split of diagnosis.test_per_class records "
            "per class that did not contribute to any prototype.",
        )
        parser.add_argument(
            "--sample-per-class",
            type=int,
            metavar="N",
            help="Like --holdout, with N records per class.",
        )
        parser.add_argument(
            "--plots",
            action="store_true",
            help="Also draw each record against its nearest prototypes.",
        )

    def handle(
        self,
        *,
        config,
        src,
        library=None,
        out=None,
        labels=None,
        holdout=False,
        sample_per_class=None,
        plots=False,
        **options
    ):
        root = src if src.is_dir() else src.parent.parent
        library_path = library or root / LIBRARY_FILENAME
        if not library_path.exists():
            raise CommandError(
                "Library {} not found, run build first".format(library_path)
            )

        libraries = Libraries(load_library(library_path))
        bundles = load_bundles(src, labels)
        if holdout and sample_per_class is None:
            sample_per_class = config.diagnosis.test_per_class
        if sample_per_class is not None:
            if sample_per_class < 1:
                raise CommandError("--sample-per-class must be >= 1", 2)
            bundles = holdout_split(
                bundles, libraries, sample_per_class, config
            )

        reports = diagnose_bundles(
            bundles, libraries, out or root, config, plots=plots
        )
        print("{} records diagnosed".format(len(reports)))
