"""Exception types shared across the package."""


class InputError(ValueError):
    """Caller-supplied data or parameters violate a documented precondition."""


class ParseError(InputError):
    """A data file could not be parsed; message carries file, line and column."""


class ConfigError(InputError):
    """A configuration file or override is malformed or inconsistent."""


class ResourceError(RuntimeError):
    """A requested computation exceeds a configured resource cap."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a usable result."""
