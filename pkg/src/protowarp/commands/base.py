import argparse
import logging
from pathlib import Path

from tqdm.contrib.logging import logging_redirect_tqdm

from ..exceptions import ConfigError, NoRecordsFound, ProtowarpError
from ..settings import PipelineConfig, load_config
from ..utils import configure_logging


class CommandError(Exception):
    """
    An unrecoverable command failure, reported on stderr with `returncode` as
    the exit status.
    """

    def __init__(self, message, returncode=1):
        super().__init__(message)
        self.returncode = returncode


class BaseCommand:
    help = ""
    aliases = ()

    def create_parser(self, prog, subparsers=None) -> argparse.ArgumentParser:
        kwargs = {"help": self.help, "description": self.help}
        if subparsers is not None:
            parser = subparsers.add_parser(
                prog, aliases=list(self.aliases), **kwargs
            )
        else:
            parser = argparse.ArgumentParser(prog=prog, description=self.help)
        parser.add_argument(
            "--config",
            type=Path,
            help="Pipeline configuration file (TOML). Defaults to "
            "./protowarp.toml when present.",
        )
        parser.add_argument(
            "--seed",
            type=int,
            help="Override rng_seed from the configuration.",
        )
        parser.add_argument(
            "--workers",
            type=int,
            help="Override the number of worker processes.",
        )
        parser.add_argument(
            "--verbose",
            action="store_true",
            help="Log every record, not only the summaries.",
        )
        self.add_arguments(parser)
        parser.set_defaults(command=self)
        return parser

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    def add_out_argument(self, parser, help, default=None):
        parser.add_argument(
            "--out",
            "--dest",
            dest="out",
            type=Path,
            metavar="DIR",
            default=default,
            help=help,
        )

    def load_config(
        self, config=None, seed=None, workers=None
    ) -> PipelineConfig:
        config = load_config(config)
        changes = {}
        if seed is not None:
            changes["rng_seed"] = seed
        if workers is not None:
            changes["workers"] = workers
        return config.replace(**changes) if changes else config

    def execute(self, **options) -> None:
        configure_logging(options.pop("verbose", False))
        try:
            config = self.load_config(
                options.pop("config", None),
                options.pop("seed", None),
                options.pop("workers", None),
            )
            with logging_redirect_tqdm():
                self.handle(config=config, **options)
        except CommandError:
            raise
        except (NoRecordsFound, ConfigError) as e:
            raise CommandError(e, returncode=2)
        except (ProtowarpError, OSError) as e:
            logging.getLogger(__name__).debug("command failed", exc_info=True)
            raise CommandError("{}: {}".format(type(e).__name__, e))

    def handle(self, *, config: PipelineConfig, **options) -> None:
        raise NotImplementedError
