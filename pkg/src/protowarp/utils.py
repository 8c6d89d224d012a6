import contextlib
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, TypeVar

import tqdm

T = TypeVar("T")
R = TypeVar("R")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def progress(sequence, **kwargs):
    return tqdm.tqdm(sequence, **kwargs)


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
    )


def log_event(logger: logging.Logger, level: int = logging.INFO, **fields):
    """Emit one `key=value` line, e.g. `stage=screen record=17 status=ok`."""
    logger.log(
        level,
        " ".join(
            "{}={}".format(key, _log_value(x)) for key, x in fields.items()
        ),
    )


def _log_value(value) -> str:
    text = str(value)
    if not text or any(c.isspace() for c in text) or '"' in text:
        return json.dumps(text)
    return text


@contextlib.contextmanager
def atomic_write(path: Path, mode: str = "w") -> Iterator:
    """
    Write to a temporary file next to `path` and rename it into place, so that
    readers never observe a partially written output.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=".{}.".format(path.name), suffix=".tmp"
    )
    try:
        with os.fdopen(fd, mode) as f:
            yield f
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


def dump_json(data, path: Path) -> None:
    with atomic_write(path) as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def parallel_imap(
    fn: Callable[[T], R], items: Iterable[T], workers: int = 1
) -> Iterator[R]:
    """
    Lazily map `fn` over `items` preserving order. With more than one worker
    the calls run in a process pool; `fn` and the items must then be picklable.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        yield from (fn(x) for x in items)
        return

    with ProcessPoolExecutor(max_workers=workers) as executor:
        yield from executor.map(fn, items, chunksize=_chunksize(items, workers))


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], workers: int = 1
) -> List[R]:
    return list(parallel_imap(fn, items, workers))


def _chunksize(items, workers):
    return max(1, len(items) // (workers * 4))
