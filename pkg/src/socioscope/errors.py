"""Exception types shared across the toolkit."""


class SocioscopeError(Exception):
    """Base class for all toolkit errors."""


class IngestError(SocioscopeError):
    """Input file unreadable or structurally unusable."""


class VocabularyError(SocioscopeError):
    """A requested token is not in the model vocabulary."""


class SeriesError(SocioscopeError):
    """A timeseries operation received invalid input."""


class GraphError(SocioscopeError):
    """A graph operation received invalid input."""


class HashingError(SocioscopeError):
    """An image could not be decoded or hashed."""


class ClusteringError(SocioscopeError):
    """Clustering parameters out of range."""


class ModelError(SocioscopeError):
    """Point-process model misconfiguration (instability, bad priors)."""


class ConfigError(SocioscopeError):
    """Pipeline configuration failed validation.

    ``field`` carries the dotted path of the offending config entry.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DependencyError(SocioscopeError):
    """A pipeline stage was requested before the stage it depends on."""
