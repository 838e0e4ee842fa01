"""Exception types shared across the pipeline."""


class CrisisPulseError(Exception):
    """Base class for all pipeline errors."""


class EmptyCorpus(CrisisPulseError):
    pass


class InvalidHyperparameter(CrisisPulseError):
    pass


class VocabularyMismatch(CrisisPulseError):
    pass


class TopicOutOfRange(CrisisPulseError):
    pass


class LexiconMissing(CrisisPulseError):
    pass


class RemoteUnavailable(CrisisPulseError):
    pass


class ProtocolError(CrisisPulseError):
    pass


class MalformedGroup(CrisisPulseError):
    pass


class NoReportsFound(CrisisPulseError):
    pass


class NoOverlap(CrisisPulseError):
    pass


class DegenerateSeries(CrisisPulseError):
    pass


class EmptyFrame(CrisisPulseError):
    pass


class ConfigError(CrisisPulseError):
    pass
