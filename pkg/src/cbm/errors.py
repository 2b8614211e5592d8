"""Exception types shared across the package."""


class CbmError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CbmError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class CapacityError(CbmError, ValueError):
    """A requested weight exceeds the configured Jack-table limit."""


class ConfigError(CbmError, ValueError):
    """Invalid Markov-chain configuration."""


class CacheError(CbmError):
    """A cache file failed validation and must not be trusted."""
