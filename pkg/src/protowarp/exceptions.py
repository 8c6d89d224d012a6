class ProtowarpError(Exception):
    """Base class of all errors raised by protowarp."""


class ConfigError(ProtowarpError, ValueError):
    pass


# Record ingestion


class MalformedHeader(ProtowarpError, ValueError):
    pass


class MissingSignalFile(ProtowarpError, FileNotFoundError):
    pass


class UnsupportedFormat(ProtowarpError, ValueError):
    pass


class LeadCountMismatch(ProtowarpError, ValueError):
    pass


class MissingLead(ProtowarpError, ValueError):
    def __init__(self, lead):
        super().__init__("MissingLead({})".format(lead))
        self.lead = lead


class DuplicateLead(ProtowarpError, ValueError):
    def __init__(self, lead):
        super().__init__("DuplicateLead({})".format(lead))
        self.lead = lead


class NonNumericCell(ProtowarpError, ValueError):
    pass


class RaggedRows(ProtowarpError, ValueError):
    pass


class InvalidRecord(ProtowarpError, ValueError):
    pass


# Persistence


class FormatVersionMismatch(ProtowarpError, ValueError):
    pass


class BeatLengthMismatch(ProtowarpError, ValueError):
    pass


class InvalidOccurrence(ProtowarpError, ValueError):
    pass


class EmptyCurveList(ProtowarpError, ValueError):
    pass


class LengthMismatch(ProtowarpError, ValueError):
    pass


# Signal processing


class CutoffOutOfRange(ProtowarpError, ValueError):
    pass


class SignalTooShort(ProtowarpError, ValueError):
    pass


class NotEnoughBeats(ProtowarpError, ValueError):
    pass


class DegenerateFlatBeats(ProtowarpError, ValueError):
    pass


# Warping and prototypes


class NonFiniteInput(ProtowarpError, ValueError):
    pass


class StepUnderflow(ProtowarpError, ArithmeticError):
    pass


class NonPositiveRatio(ProtowarpError, ValueError):
    pass


class EmptyLibrary(ProtowarpError, ValueError):
    pass


class EmptyClassPool(ProtowarpError, ValueError):
    pass


# Pipeline


class NoRecordsFound(ProtowarpError, FileNotFoundError):
    pass
