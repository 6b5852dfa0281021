"""Precision-aware evaluation of (1 - x)^e and arithmetic backends.

Powers like (1 - eta/ell)^(2d) appear with eta/ell as small as 1e-15 and
exponents as large as 1e12; forming 1 - x directly in binary64 loses most
of x to rounding before the power amplifies the damage.  All such powers
therefore go through exp(e * log1p(-x)).

``extended_backend`` returns an 80-bit long-double backend when the
platform provides one, else an mpmath backend at 50 digits; both are used
to recheck double-precision schedule arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

_LONGDOUBLE_OK = np.finfo(np.longdouble).nmant > np.finfo(np.float64).nmant


def pow1m(x: float, e: float) -> float:
    """(1 - x)^e for 0 <= x < 1 without cancellation in 1 - x."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"need 0 <= x < 1, got {x}")
    return math.exp(e * math.log1p(-x))


def pow1m_array(x: float, e) -> np.ndarray:
    """Vectorized (1 - x)^e over an exponent array."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"need 0 <= x < 1, got {x}")
    return np.exp(np.asarray(e, dtype=np.float64) * math.log1p(-x))


class FloatBackend:
    """Binary64 arithmetic via the math module."""

    name = "double"

    @staticmethod
    def num(x):
        return float(x)

    @staticmethod
    def log(x):
        return math.log(x)

    @staticmethod
    def pow1m(x, e):
        return math.exp(e * math.log1p(-x))

    @staticmethod
    def to_float(x):
        return float(x)


class LongDoubleBackend:
    """x87 80-bit extended precision (64-bit mantissa)."""

    name = "longdouble"

    @staticmethod
    def num(x):
        return np.longdouble(x)

    @staticmethod
    def log(x):
        return np.log(np.longdouble(x))

    @staticmethod
    def pow1m(x, e):
        return np.exp(np.longdouble(e) * np.log1p(-np.longdouble(x)))

    @staticmethod
    def to_float(x):
        return float(x)


class MpmathBackend:
    """Arbitrary-precision fallback (50 significant digits)."""

    name = "mpmath"

    def __init__(self, dps: int = 50):
        import mpmath

        self.mp = mpmath.mp
        self.mpf = mpmath.mpf
        self.dps = dps
        self._mpmath = mpmath

    def num(self, x):
        with self._mpmath.workdps(self.dps):
            return self.mpf(x)

    def log(self, x):
        with self._mpmath.workdps(self.dps):
            return self._mpmath.log(x)

    def pow1m(self, x, e):
        with self._mpmath.workdps(self.dps):
            return self._mpmath.exp(e * self._mpmath.log(1 - self.mpf(x)))

    @staticmethod
    def to_float(x):
        return float(x)


def extended_backend():
    return LongDoubleBackend() if _LONGDOUBLE_OK else MpmathBackend()
