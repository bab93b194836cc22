"""Log-domain arithmetic for the constants pipeline.

The assembled convergence constants compound doubly-exponentially: even for
small worked examples the intermediate quantities reach magnitudes near
``exp(1e5)`` while contraction rates sit within ``exp(-1e5)`` of 1.  Neither
end survives a linear float64 representation, so every pipeline quantity is a
:class:`LogReal` (a nonnegative real stored as its natural log in float64)
and every rate ``r`` is tracked through its excess ``r - 1``.

Relative precision is the ordinary float64 ~1e-16 throughout; only the
representable magnitude range changes.
"""

from __future__ import annotations

import math

__all__ = [
    "LogReal",
    "ZERO",
    "ONE",
    "log_of_rate",
    "expm1_log",
    "one_minus_exp_neg",
    "neg_log1p_neg",
]


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


class LogReal:
    """A nonnegative real number represented by its natural logarithm.

    ``log = -inf`` encodes exact zero.  Arithmetic accepts plain ints and
    floats (which must be nonnegative) and coerces them.
    """

    __slots__ = ("log",)

    def __init__(self, log: float):
        self.log = float(log)

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x < 0:
            raise ValueError(f"LogReal cannot represent negative value {x}")
        if x == 0:
            return cls(-math.inf)
        return cls(math.log(x))

    @classmethod
    def from_log(cls, log: float) -> "LogReal":
        return cls(log)

    def to_float(self) -> float:
        """Linear value; overflows to ``inf`` past ~1e308 by design."""
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def __float__(self) -> float:
        return self.to_float()

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    @staticmethod
    def _coerce(other) -> "LogReal":
        if isinstance(other, LogReal):
            return other
        if isinstance(other, (int, float)):
            return LogReal.from_float(float(other))
        return NotImplemented  # type: ignore[return-value]

    def __mul__(self, other) -> "LogReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return ZERO
        return LogReal(self.log + o.log)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("LogReal division by zero")
        if self.is_zero:
            return ZERO
        return LogReal(self.log - o.log)

    def __rtruediv__(self, other) -> "LogReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: float) -> "LogReal":
        e = float(exponent)
        if self.is_zero:
            if e == 0.0:
                return ONE
            if e < 0:
                raise ZeroDivisionError("zero to a negative power")
            return ZERO
        return LogReal(self.log * e)

    def __add__(self, other) -> "LogReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return LogReal(_logaddexp(self.log, o.log))

    __radd__ = __add__

    def __sub__(self, other) -> "LogReal":
        """Difference; requires ``self >= other`` up to one ulp."""
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero:
            return self
        d = o.log - self.log
        if d >= 0:
            # Equal values (or off by rounding) give an exact zero; a real
            # sign flip is a caller bug.
            if d < 1e-12:
                return ZERO
            raise ValueError(
                f"LogReal subtraction would be negative (logs {self.log}, {o.log})"
            )
        return LogReal(self.log + math.log1p(-math.exp(d)))

    def _cmp_key(self) -> float:
        return self.log

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        return self.log < o.log

    def __le__(self, other) -> bool:
        o = self._coerce(other)
        return self.log <= o.log

    def __gt__(self, other) -> bool:
        o = self._coerce(other)
        return self.log > o.log

    def __ge__(self, other) -> bool:
        o = self._coerce(other)
        return self.log >= o.log

    def __eq__(self, other) -> bool:
        if isinstance(other, (LogReal, int, float)):
            return self.log == self._coerce(other).log
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("LogReal", self.log))

    def __repr__(self) -> str:
        return f"LogReal(log={self.log!r})"


ZERO = LogReal(-math.inf)
ONE = LogReal(0.0)

# Threshold below which ln(1+x) = x, expm1(x) = x, -log1p(-x) = x hold to
# better than float64 relative precision.
_TINY_LOG = -40.0


def log_of_rate(eps: LogReal) -> LogReal:
    """``ln(1 + eps)`` for a rate excess ``eps >= 0``, as a LogReal."""
    if eps.is_zero:
        return ZERO
    if eps.log < _TINY_LOG:
        return eps
    x = eps.to_float()
    if math.isinf(x):
        return LogReal(eps.log)
    return LogReal.from_float(math.log1p(x))


def exp_log(x: LogReal) -> LogReal:
    """``exp(x)`` for ``x >= 0``, as a LogReal (log = linear value of x)."""
    return LogReal(x.to_float())


def expm1_log(x: LogReal) -> LogReal:
    """``exp(x) - 1`` for ``x >= 0``, as a LogReal."""
    if x.is_zero:
        return ZERO
    if x.log < _TINY_LOG:
        return x
    v = x.to_float()
    if v > 700.0:
        return LogReal(v)
    return LogReal.from_float(math.expm1(v))


def one_minus_exp_neg(margin: LogReal) -> LogReal:
    """``1 - exp(-margin)`` for ``margin >= 0``, as a LogReal.

    Used for ``1 - R`` where ``R = exp(-margin)`` may sit within one ulp of
    1; forming ``R`` itself would lose the margin entirely.
    """
    if margin.is_zero:
        return ZERO
    if margin.log < _TINY_LOG:
        return margin
    m = margin.to_float()
    if m > 40.0:
        return ONE
    return LogReal.from_float(-math.expm1(-m))


def neg_log1p_neg(c: LogReal) -> LogReal:
    """``-ln(1 - c) = ln(1/(1-c))`` for ``0 <= c <= 1``, as a LogReal.

    ``c == 1`` returns log ``+inf`` (the value is infinite), which the
    callers treat as an exactly-zero failure probability.
    """
    if c.is_zero:
        return ZERO
    if c.log > 0:
        raise ValueError("probability above 1 in neg_log1p_neg")
    if c.log == 0.0:
        return LogReal(math.inf)
    if c.log < _TINY_LOG:
        return c
    return LogReal.from_float(-math.log1p(-c.to_float()))
