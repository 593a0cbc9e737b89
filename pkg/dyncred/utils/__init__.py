"""dyncred utilities."""

from .logging import CredibilityLogger
from .env import RuntimeDefaults

__all__ = ["CredibilityLogger", "RuntimeDefaults"]
