"""Exception hierarchy shared across the package."""

from __future__ import annotations


class NashQuboError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(NashQuboError):
    """A shape, index, or length does not match the structure it refers to."""


class ParameterError(NashQuboError):
    """A configuration value is outside its allowed range."""


class GameFormatError(NashQuboError):
    """A game description could not be parsed."""


class CompileError(NashQuboError):
    """The penalized objective could not be assembled from its inputs."""


class ModelFormatError(NashQuboError):
    """A serialized binary model could not be parsed."""


class CapacityError(NashQuboError):
    """The exhaustive solver was asked to enumerate more variables than its limit."""


class CertificationError(NashQuboError):
    """A decoded solution was rejected by the certification step."""


class ExternalSamplerError(NashQuboError):
    """Base class for failures of the external sampling subprocess."""


class ExternalProcessError(ExternalSamplerError):
    """The external sampler process could not be run or exited with an error."""


class MalformedRecordError(ExternalSamplerError):
    """The external sampler produced output that does not follow the protocol."""


class IntegrityError(ExternalSamplerError):
    """An externally reported energy disagrees with local recomputation."""
