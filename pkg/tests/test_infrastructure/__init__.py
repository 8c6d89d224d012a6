from .base import PipelineTestBase
from .factories import (
    make_beat,
    make_beats,
    make_record,
    make_record_id,
    make_waveform,
)
from .utils import assert_ran_successfully, run_command

__all__ = (
    "PipelineTestBase",
    "make_beat",
    "make_beats",
    "make_record",
    "make_record_id",
    "make_waveform",
    "assert_ran_successfully",
    "run_command",
)
