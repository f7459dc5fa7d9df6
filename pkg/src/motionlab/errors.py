"""Exception types shared across the pipeline."""


class MotionLabError(Exception):
    """Base class for all package errors."""


# --- gateway ---------------------------------------------------------------

class TransportError(MotionLabError):
    """Transient transport failure that survived every retry."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class TimeoutError(TransportError):  # noqa: A001 - mirrors asyncio.TimeoutError
    """Request deadline exceeded on every attempt."""


class ProviderError(MotionLabError):
    """Non-retryable provider response (bad request, auth, quota)."""

    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code


class ScriptExhausted(MotionLabError):
    """Strict replay client ran out of scripted replies."""


class PromptMismatch(MotionLabError):
    """Strict replay client received a prompt that differs from the recording."""


# --- planning ---------------------------------------------------------------

class ParseError(MotionLabError):
    """Reply could not be parsed after the re-ask budget."""


class StepCapExceeded(MotionLabError):
    """High-level loop hit the step cap with strict capping enabled."""


class OptionParseError(MotionLabError):
    """No option label could be matched in a reply."""


# --- compilation / metrics --------------------------------------------------

class UnknownPosition(MotionLabError):
    """(part, position) pair has no rotation rule."""


class UnknownJoint(MotionLabError):
    """Joint name not present in the skeleton."""


class OutOfRange(MotionLabError):
    """Sample time outside the clip's [0, duration] interval."""


class ShapeMismatch(MotionLabError):
    """Predicted plan and oracle annotation disagree on step count or motion."""
