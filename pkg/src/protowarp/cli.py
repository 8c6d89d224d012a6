import argparse
import importlib
import sys

from .commands import COMMANDS
from .commands.base import CommandError


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protowarp",
        description="Prototype-based LVH screening of 12-lead ECGs.",
    )
    subparsers = parser.add_subparsers(title="commands", metavar="command")
    subparsers.required = True
    for name, module_path in COMMANDS.items():
        command = importlib.import_module(module_path).Command()
        command.create_parser(name, subparsers)
    return parser


def main(argv=None) -> int:
    parser = create_parser()
    options = vars(parser.parse_args(argv))
    command = options.pop("command")
    try:
        command.execute(**options)
    except CommandError as e:
        sys.stderr.write("CommandError: {}\n".format(e))
        return e.returncode
    return 0
