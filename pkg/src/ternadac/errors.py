"""Exception hierarchy with machine-readable categories for the CLI."""

from __future__ import annotations


class TernadacError(Exception):
    """Base error; `category` is the machine-readable code emitted by the CLI."""

    category = "INTERNAL"
    exit_code = 1


class ConfigError(TernadacError):
    """Invalid configuration, stimulus specification or command arguments."""

    category = "CONFIG"
    exit_code = 2


class RangeError(TernadacError):
    """Value outside its documented domain (codec range, bad record length...)."""

    category = "RANGE"
    exit_code = 3


class SolverError(TernadacError):
    """Structural or numerical failure of the network solver."""

    category = "SOLVER"
    exit_code = 4


class CalibrationError(SolverError):
    """A weight-ratio target cannot be met with a positive resistance."""


class FileFormatError(TernadacError):
    """Malformed input or output file."""

    category = "IO"
    exit_code = 5
