"""Signed numbers stored as (sign, natural log of magnitude)."""
from __future__ import annotations

import math
from dataclasses import dataclass

_LOG10 = math.log(10.0)


@dataclass(frozen=True)
class LogScaleNumber:
    log_value: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")

    @classmethod
    def zero(cls) -> "LogScaleNumber":
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, value: float) -> "LogScaleNumber":
        if value == 0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def from_log10(cls, exponent: float) -> "LogScaleNumber":
        return cls(exponent * _LOG10)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_value > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_value)

    @property
    def log10(self) -> float:
        return self.log_value / _LOG10

    def scientific(self, digits: int = 3) -> str:
        if self.sign == 0:
            return "0"
        e = math.floor(self.log10)
        m = 10 ** (self.log10 - e)
        return f"{'-' if self.sign < 0 else ''}{m:.{digits - 1}f}e{e}"

    def __neg__(self) -> "LogScaleNumber":
        return LogScaleNumber(self.log_value, -self.sign)

    def __mul__(self, other: "LogScaleNumber") -> "LogScaleNumber":
        if self.sign == 0 or other.sign == 0:
            return LogScaleNumber.zero()
        return LogScaleNumber(self.log_value + other.log_value, self.sign * other.sign)

    def __truediv__(self, other: "LogScaleNumber") -> "LogScaleNumber":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaleNumber")
        if self.sign == 0:
            return LogScaleNumber.zero()
        return LogScaleNumber(self.log_value - other.log_value, self.sign * other.sign)

    def __add__(self, other: "LogScaleNumber") -> "LogScaleNumber":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_value >= other.log_value else (other, self)
        d = small.log_value - big.log_value
        if big.sign == small.sign:
            return LogScaleNumber(big.log_value + math.log1p(math.exp(d)), big.sign)
        if d == 0:
            return LogScaleNumber.zero()
        return LogScaleNumber(big.log_value + math.log1p(-math.exp(d)), big.sign)

    def __sub__(self, other: "LogScaleNumber") -> "LogScaleNumber":
        return self + (-other)
