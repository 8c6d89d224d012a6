import argparse
from pathlib import Path

from ..engine import build_libraries, load_bundles
from ..storage import LIBRARY_FILENAME, SCREENING_FILENAME
from .base import BaseCommand


class Command(BaseCommand):
    help = "Build the Normal and LVH prototype libraries of every lead."
    aliases = ("build-library",)

    def add_arguments(self, parser):
        parser.add_argument(
            "src",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Directory holding the beat bundles",
            default=Path("./protowarp-out"),
        )
        parser.add_argument(
            "--labels",
            type=Path,
            help="CSV of record_id,label pairs for unlabelled bundles.",
        )
        parser.add_argument(
            "--screening",
            type=Path,
            help="Screening table to take eligibility from (defaults to "
            "src/screening.csv when present).",
        )
        parser.add_argument(
            "--output",
            type=Path,
            help="Library file to write (defaults to out/library.json).",
        )
        self.add_out_argument(
            parser, "Where to write library.json (defaults to src)."
        )

    def handle(
        self,
        *,
        config,
        src,
        labels=None,
        screening=None,
        output=None,
        out=None,
        **options
    ):
        libraries = build_libraries(
            load_bundles(src, labels),
            output or (out or src) / LIBRARY_FILENAME,
            config,
            screening_file=screening or src / SCREENING_FILENAME,
        )
        print(
            "{} libraries, {} prototypes".format(
                len(libraries), sum(len(x.prototypes) for x in libraries)
            )
        )
