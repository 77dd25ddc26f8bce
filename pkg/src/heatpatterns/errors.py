"""Common exception base for the heatpatterns package.

Every module defines its own specific exceptions; they all derive from
:class:`HeatPatternsError` so callers (notably the CLI) can separate
pipeline failures from unrelated bugs.
"""


class HeatPatternsError(Exception):
    """Base class for all errors raised by this package."""
