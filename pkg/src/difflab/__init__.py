"""Small 2D diffusion-model lab: tiny MLP denoisers, samplers with full
trajectory recording, density visualization, and a local session service."""

__version__ = "0.1.0"


class ConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class ContractError(ValueError):
    """A caller broke an operation's precondition (shapes, index ranges)."""


class UsageError(ValueError):
    """A request is well-formed but not valid in the current state."""
