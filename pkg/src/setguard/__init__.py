"""Output-constrained feedback: barrier transforms, control laws, certificates and simulation."""

from .errors import ConfigError, OutOfSet, SetguardError

__version__ = "0.1.0"

__all__ = ["ConfigError", "OutOfSet", "SetguardError", "__version__"]
