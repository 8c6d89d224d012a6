import argparse
from pathlib import Path

from ..engine import evaluate_reports
from .base import BaseCommand


class Command(BaseCommand):
    help = (
        "Confusion matrices of BSW, Sokolow-Lyon and Cornell on labelled "
        "reports."
    )

    def add_arguments(self, parser):
        parser.add_argument(
            "src",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Directory holding reports/",
            default=Path("./protowarp-out"),
        )
        self.add_out_argument(
            parser,
            "Where to write confusion.csv and confusion.svg (defaults to src).",
        )

    def handle(self, *, config, src, out=None, **options):
        matrices = evaluate_reports(src, out or src)
        for method, matrix in matrices.items():
            print(
                "{:<13} sensitivity {:.3f} specificity {:.3f} (n={})".format(
                    method, matrix.sensitivity, matrix.specificity, matrix.total
                )
            )
