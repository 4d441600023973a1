"""Exception hierarchy shared by every subsystem."""

from __future__ import annotations


class SkirmishError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SkirmishError, ValueError):
    pass


class ProtocolError(SkirmishError, ValueError):
    """Caller violated the step/reset calling contract."""


class IllegalActionError(SkirmishError, ValueError):
    """A command or action index is not legal in the current state."""

    def __init__(self, message: str, *, player: int | None = None,
                 agent: int | None = None, action: int | None = None):
        super().__init__(message)
        self.player = player
        self.agent = agent
        self.action = action


class ReplayFormatError(SkirmishError, ValueError):
    def __init__(self, message: str, record_index: int):
        super().__init__(f"record {record_index}: {message}")
        self.record_index = record_index
