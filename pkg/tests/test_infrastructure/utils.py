import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]


def run_command(*command, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "protowarp", *command],
        cwd=ROOT,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        env={
            **os.environ,
            # The subprocess is not part of the pytest environment, so it needs
            # the source tree on its path explicitly.
            "PYTHONPATH": os.pathsep.join(
                x
                for x in (str(ROOT / "src"), os.environ.get("PYTHONPATH"))
                if x
            ),
        },
        **kwargs
    )


def assert_ran_successfully(process: subprocess.CompletedProcess):
    assert process.returncode == 0, process.stderr.decode("utf-8")
