import argparse
from pathlib import Path

from ..engine import load_bundles, screen_bundles
from .base import BaseCommand


class Command(BaseCommand):
    help = "Score beat-to-beat variability and mark regular prototype donors."

    def add_arguments(self, parser):
        parser.add_argument(
            "src",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Directory holding the beat bundles",
            default=Path("./protowarp-out"),
        )
        self.add_out_argument(
            parser, "Where to write screening.csv (defaults to src)."
        )

    def handle(self, *, config, src, out=None, **options):
        reports = screen_bundles(load_bundles(src), out or src, config)
        print(
            "{} of {} records eligible".format(
                sum(x.eligible for x in reports), len(reports)
            )
        )
