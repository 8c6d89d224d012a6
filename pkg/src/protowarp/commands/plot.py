import argparse
from pathlib import Path

from ..engine import plot_beats, plot_libraries, plot_warp
from ..records import ALL_LEADS, LeadId
from .base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Draw prototype libraries, beat overlays or a single warp as SVG."

    def add_arguments(self, parser):
        parser.add_argument(
            "library",
            nargs=argparse.OPTIONAL,
            type=Path,
            help="Library file; one SVG per (class, lead) library",
        )
        self.add_out_argument(
            parser, "Output directory", default=Path("./protowarp-out/plots")
        )
        parser.add_argument(
            "--beats",
            type=Path,
            metavar="BUNDLE",
            help="Draw every beat of a bundle over its mean beat.",
        )
        parser.add_argument(
            "--warp",
            type=Path,
            nargs=2,
            metavar="BUNDLE",
            help="Warp the mean beat of one bundle onto another's.",
        )
        parser.add_argument(
            "--lead",
            type=LeadId.parse,
            help="Restrict --beats to one lead; required with --warp.",
        )

    def handle(
        self,
        *,
        config,
        library=None,
        out,
        beats=None,
        warp=None,
        lead=None,
        **options
    ):
        if library is None and beats is None and warp is None:
            raise CommandError(
                "Nothing to plot: give a library, --beats or --warp", 2
            )

        written = []
        if library is not None:
            written += plot_libraries(library, out)
        if beats is not None:
            written += plot_beats(beats, out, (lead,) if lead else ALL_LEADS)
        if warp is not None:
            if lead is None:
                raise CommandError("--warp needs --lead", 2)
            written.append(plot_warp(warp[0], warp[1], lead, out, config))

        print("{} figures written to {}".format(len(written), out))
