"""Log-domain scalar special functions.

Everything here returns natural-log magnitudes so that callers never touch
quantities like 1F1(13, 0.5, 900), whose linear value overflows double
precision by hundreds of orders of magnitude.  The hypergeometric series are
summed by streaming log-sum-exp over buffered blocks of terms; all in-scope
calls have positive parameters and non-negative argument, so every term is
positive and the series is unimodal in the term index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LogValue",
    "NonConvergenceError",
    "log_gamma",
    "log_gamma_half_ratio",
    "digamma",
    "trigamma",
    "log_pochhammer",
    "log_1f1",
    "log_2f1",
]

TERM_CAP = 10_000_000

_BLOCK = 128
# A term this far (in log) below the running maximum contributes nothing.
_LOG_TERM_FLOOR = math.log(1e-16)
# Euler transformation threshold for 2F1 arguments close to 1.
_EULER_X = 0.9


class NonConvergenceError(RuntimeError):
    """A hypergeometric series failed to satisfy its stopping rule."""


@dataclass(frozen=True)
class LogValue:
    """A real number stored as (log |x|, sign).

    sign is 0 exactly when the value is zero, in which case log_magnitude is
    meaningless and ignored.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0, or +1, got {self.sign}")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(float("-inf"), 0)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(0.0, 1)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "LogValue":
        return cls(log_magnitude, sign)

    def scaled(self, log_factor: float, sign: int = 1) -> "LogValue":
        """Multiply by sign * exp(log_factor)."""
        if self.sign == 0:
            return self
        return LogValue(self.log_magnitude + log_factor, self.sign * sign)

    def plus(self, other: "LogValue") -> "LogValue":
        """Signed log-sum-exp of two values."""
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        m = max(self.log_magnitude, other.log_magnitude)
        v = self.sign * math.exp(self.log_magnitude - m) + other.sign * math.exp(
            other.log_magnitude - m
        )
        if v == 0.0:
            return LogValue.zero()
        return LogValue(m + math.log(abs(v)), 1 if v > 0 else -1)

    def value(self) -> float:
        """Linear-domain value; overflows to +/-inf for huge magnitudes."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * float("inf")


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


# Asymptotic tails: psi(x) ~ ln x - 1/(2x) - sum B_2k/(2k x^2k),
# psi_1(x) ~ 1/x + 1/(2x^2) + sum B_2k/x^(2k+1).  With the recurrence shift
# to x >= 6 the truncation error is below 2e-13, well inside the 1e-10
# contract.
_DIGAMMA_TAIL = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)
_TRIGAMMA_TAIL = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)
_PSI_SHIFT = 6.0


def digamma(x: float) -> float:
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _PSI_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for c in _DIGAMMA_TAIL:
        tail += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x + tail


def trigamma(x: float) -> float:
    """psi_1(x) = d^2/dx^2 ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"trigamma requires x > 0, got {x}")
    acc = 0.0
    while x < _PSI_SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    tail = 0.0
    p = inv2 * inv
    for c in _TRIGAMMA_TAIL:
        tail += c * p
        p *= inv2
    return acc + inv + 0.5 * inv2 + tail


_HALF_RATIO_SWITCH = 50.0
# Stirling tail sum B_2k / (2k (2k-1) y^(2k-1)), k = 1..5
_STIRLING_TAIL = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
)


def _stirling_tail(y: float) -> float:
    inv2 = 1.0 / (y * y)
    acc = 0.0
    p = 1.0 / y
    for c in _STIRLING_TAIL:
        acc += c * p
        p *= inv2
    return acc


def log_gamma_half_ratio(x: float) -> float:
    """ln Gamma(x + 1/2) - ln Gamma(x), with absolute error near machine
    precision for all x > 0.

    Direct lgamma subtraction carries the absolute rounding of two huge
    values when x is large; past x = 50 the difference is formed from the
    Stirling series, whose leading terms cancel analytically via log1p
    (the difference enters cancellation-prone brackets where absolute log
    errors are amplified).
    """
    if not x > 0.0:
        raise ValueError(f"log_gamma_half_ratio requires x > 0, got {x}")
    if x < _HALF_RATIO_SWITCH:
        return math.lgamma(x + 0.5) - math.lgamma(x)
    return (
        0.5 * math.log(x)
        + x * math.log1p(0.5 / x)
        - 0.5
        + _stirling_tail(x + 0.5)
        - _stirling_tail(x)
    )


def log_pochhammer(a: float, i: int) -> float:
    """ln of the rising factorial (a)(a+1)...(a+i-1); (a)^(0) = 1."""
    if i < 0:
        raise ValueError(f"log_pochhammer requires i >= 0, got {i}")
    if i == 0:
        return 0.0
    return log_gamma(a + i) - log_gamma(a)


_IDX = np.arange(_BLOCK, dtype=np.float64)


def _log_series_sum(log_x: float, num: tuple, den: tuple) -> float:
    """Log of sum_{i>=0} t_i with t_0 = 1 and
    t_{i+1}/t_i = x * prod(num + i) / prod(den + i).

    Terms are positive; the series is unimodal in i.  Blocks of log-terms are
    accumulated with an online-rescaled log-sum-exp.  Stops when the latest
    term is <= 1e-16 of the running maximum AND the term ratio is < 1 (past
    the series peak); raises NonConvergenceError at the term cap.
    """
    log_max = 0.0
    acc = 1.0
    log_term = 0.0
    i0 = 0.0
    while i0 < TERM_CAP:
        idx = i0 + _IDX
        ratio = num[0] + idx
        for a in num[1:]:
            ratio = ratio * (a + idx)
        dprod = den[0] + idx
        for b in den[1:]:
            dprod = dprod * (b + idx)
        ratio /= dprod
        inc = np.log(ratio)
        inc += log_x
        log_terms = log_term + np.cumsum(inc)
        block_max = float(log_terms.max())
        if block_max > log_max:
            acc = acc * math.exp(log_max - block_max) + float(
                np.exp(log_terms - block_max).sum()
            )
            log_max = block_max
        else:
            acc += float(np.exp(log_terms - log_max).sum())
        log_term = float(log_terms[-1])
        i0 += _BLOCK
        if inc[-1] < 0.0 and log_term - log_max <= _LOG_TERM_FLOOR:
            return log_max + math.log(acc)
    raise NonConvergenceError(
        f"series did not converge within {TERM_CAP} terms "
        f"(x=e^{log_x:.3g}, num={num}, den={den})"
    )


def log_1f1(a: float, b: float, x: float) -> LogValue:
    """Log of the confluent hypergeometric function 1F1(a, b; x).

    Requires a > 0, b > 0, x >= 0, which keeps every series term positive.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"log_1f1 requires a, b > 0, got a={a}, b={b}")
    if x < 0.0:
        raise ValueError(f"log_1f1 requires x >= 0, got x={x}")
    if x == 0.0:
        return LogValue.one()
    return LogValue(_log_series_sum(math.log(x), (a,), (b, 1.0)), 1)


def log_2f1(a: float, b: float, c: float, x: float) -> LogValue:
    """Log of the Gaussian hypergeometric function 2F1(a, b; c; x).

    Requires a, b, c > 0 and 0 <= x < 1.  For x > 0.9 the Euler
    transformation 2F1(a,b;c;x) = (1-x)^(c-a-b) 2F1(c-a, c-b; c; x) is applied
    when both c-a and c-b are positive; otherwise the raw series is summed
    (the term cap is generous enough for arguments arbitrarily close to the
    in-scope bound tau^2/(1+tau^2)).
    """
    if not (a > 0.0 and b > 0.0 and c > 0.0):
        raise ValueError(f"log_2f1 requires a, b, c > 0, got a={a}, b={b}, c={c}")
    if x < 0.0 or x >= 1.0:
        raise ValueError(f"log_2f1 requires 0 <= x < 1, got x={x}")
    if x == 0.0:
        return LogValue.one()
    if a > b:  # symmetric in (a, b); normalize so results match bit-for-bit
        a, b = b, a
    if x > _EULER_X and c - a > 0.0 and c - b > 0.0:
        log_sum = _log_series_sum(math.log(x), (c - a, c - b), (c, 1.0))
        return LogValue((c - a - b) * math.log1p(-x) + log_sum, 1)
    return LogValue(_log_series_sum(math.log(x), (a, b), (c, 1.0)), 1)
