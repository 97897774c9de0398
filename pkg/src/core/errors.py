# src/core/errors.py
"""
例外階層 - joycekit 所有模組共用

InputError 分支對應 CLI exit code 2，ComputationError 分支是數值計算失敗。
"""

from typing import Optional


class JoyceKitError(Exception):
    """Root of every error raised by the kit."""


class InputError(JoyceKitError):
    """使用者輸入錯誤 (CLI exit 2)"""


class ComputationError(JoyceKitError):
    """數值計算失敗"""


# ---- core ----

class NotSkew(InputError):
    pass


class NonInvertible(InputError):
    pass


class ExpressionSyntaxError(InputError):
    """Parse failure with a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class PoleHit(ComputationError):
    def __init__(self, message: str, point: Optional[object] = None):
        self.point = point
        super().__init__(message)


class Overflow(ComputationError):
    pass


# ---- hyperkahler / lagrangian ----

class DegenerateFrame(ComputationError):
    pass


class PoleAtZeroSection(ComputationError):
    pass


class FrameMismatch(InputError):
    pass


class NonLagrangianBlock(InputError):
    pass


# ---- twistor / stokes ----

class StepFailure(ComputationError):
    pass


class NearZeroEpsilon(InputError):
    pass


class DegenerateEigenvalues(InputError):
    pass


class NonZeroDiagonal(InputError):
    pass


class StokesAngle(InputError):
    pass


# ---- wallcrossing ----

class ConeViolation(InputError):
    pass


class TruncationTooSmall(InputError):
    pass


class IncompatibleTruncation(InputError):
    pass


# ---- spectral ----

class RepeatedRoot(InputError):
    pass


class TooClose(InputError):
    pass


class OddCycle(InputError):
    pass


class NonTransverse(InputError):
    pass


class ToleranceUnreachable(ComputationError):
    pass


class RootCollision(ComputationError):
    pass
