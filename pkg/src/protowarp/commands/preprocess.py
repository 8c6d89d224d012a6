import argparse
from pathlib import Path

from ..engine import preprocess_records
from .base import BaseCommand


class Command(BaseCommand):
    help = "Segment raw records into per-lead beats and mean beats."

    def add_arguments(self, parser):
        parser.add_argument("src", type=Path, help="Directory of raw records")
        parser.add_argument(
            "dest",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Output directory",
            default=Path("./protowarp-out"),
        )
        parser.add_argument(
            "--labels",
            type=Path,
            help="CSV of record_id,label pairs (overrides io.labels_file).",
        )
        self.add_out_argument(parser, "Output directory (overrides dest).")

    def handle(self, *, config, src, dest, out=None, labels=None, **options):
        summary = preprocess_records(
            src, out or dest, config, labels_file=labels
        )
        print(
            "{} bundles written, {} records failed".format(
                len(summary.ok), len(summary.failed)
            )
        )
