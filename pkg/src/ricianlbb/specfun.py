"""Special functions used by the secrecy closed forms.

Gamma family (including the finite-part extension to negative integers),
generalized binomial coefficients, the lower incomplete gamma function and
the ULA array factor.  Everything here is scalar and pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_ITMAX = 10_000


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` marks an exact zero; its ``log_magnitude`` is ``-inf``.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 0)

    def __mul__(self, other: "LogValue") -> "LogValue":
        sign = self.sign * other.sign
        if sign == 0:
            return LogValue.zero()
        return LogValue(self.log_magnitude + other.log_magnitude, sign)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __pow__(self, k: int) -> "LogValue":
        if not isinstance(k, int):
            raise TypeError("LogValue powers are restricted to integers")
        if self.sign == 0:
            return LogValue.zero() if k > 0 else LogValue(0.0, 1)
        return LogValue(k * self.log_magnitude, self.sign if k % 2 else 1)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    value = __float__


def gamma_ln(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"gamma_ln requires x > 0, got {x}")
    return math.lgamma(x)


def _negative_integer(alpha: float) -> int | None:
    """Return ``k`` if ``alpha == -k`` for a positive integer ``k``, else None."""
    if alpha < 0 and alpha == math.floor(alpha):
        return int(-alpha)
    return None


def log_gamma_generalized(alpha: float) -> LogValue:
    """``gamma_generalized(alpha)`` in log/sign form, safe for large arguments."""
    if alpha == 0:
        raise ValueError("generalized gamma has no value at alpha = 0")
    k = _negative_integer(alpha)
    if k is not None:
        # (-1)^k / k! * (H_k - k)
        harmonic = math.fsum(1.0 / i for i in range(1, k + 1))
        inner = harmonic + alpha
        if inner == 0:
            return LogValue.zero()
        sign = (-1) ** k * (1 if inner > 0 else -1)
        return LogValue(math.log(abs(inner)) - math.lgamma(k + 1), sign)
    if alpha > 0:
        return LogValue(math.lgamma(alpha), 1)
    # reflection: Gamma(a) = pi / (sin(pi a) Gamma(1 - a))
    s = math.sin(math.pi * alpha)
    return LogValue(math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - alpha),
                    1 if s > 0 else -1)


def gamma_generalized(alpha: float) -> float:
    """Gamma function extended with finite values at the negative integers.

    For ``alpha = -k`` (``k`` a positive integer) this returns
    ``(-1)**k / k! * (sum_{i=1..k} 1/i - k)``; elsewhere it is the ordinary
    gamma function, continued to negative non-integers by reflection.
    ``alpha = 0`` raises ``ValueError``.
    """
    return float(log_gamma_generalized(alpha))


def binomial_generalized(alpha: float, l: int) -> float:
    """Falling-factorial binomial coefficient ``alpha (alpha-1) ... (alpha-l+1) / l!``."""
    if l < 0 or int(l) != l:
        raise ValueError(f"l must be a non-negative integer, got {l}")
    l = int(l)
    if float(alpha).is_integer():
        a = int(alpha)
        if a >= 0:
            return float(math.comb(a, l))
        # C(-a, l) = (-1)^l C(a + l - 1, l)
        return float((-1) ** l * math.comb(-a + l - 1, l))
    out = 1.0
    for i in range(l):
        out *= (alpha - i) / (i + 1)
    return out


def _gamma_series(alpha: float, x: float) -> float:
    """Regularized P(alpha, x) from the power series; use for x < alpha + 1."""
    ap = alpha
    term = 1.0 / alpha
    total = term
    for _ in range(_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series failed for a={alpha}, x={x}")
    return total * math.exp(-x + alpha * math.log(x) - math.lgamma(alpha))


def _gamma_cf(alpha: float, x: float) -> float:
    """Regularized Q(alpha, x) from the continued fraction (modified Lentz)."""
    b = x + 1.0 - alpha
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - alpha)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma continued fraction failed for a={alpha}, x={x}")
    return math.exp(-x + alpha * math.log(x) - math.lgamma(alpha)) * h


def gamma_p(alpha: float, x: float) -> float:
    """Regularized lower incomplete gamma ``gamma(alpha, x) / Gamma(alpha)``."""
    if not alpha > 0 or not x >= 0:
        raise ValueError(f"gamma_p requires alpha > 0 and x >= 0, got ({alpha}, {x})")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < alpha + 1.0:
        return _gamma_series(alpha, x)
    return 1.0 - _gamma_cf(alpha, x)


def gamma_q(alpha: float, x: float) -> float:
    """Regularized upper incomplete gamma ``1 - gamma_p``, accurate in the tail."""
    if not alpha > 0 or not x >= 0:
        raise ValueError(f"gamma_q requires alpha > 0 and x >= 0, got ({alpha}, {x})")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < alpha + 1.0:
        return 1.0 - _gamma_series(alpha, x)
    return _gamma_cf(alpha, x)


def lower_incomplete_gamma(alpha: float, x: float) -> float:
    """Unregularized lower incomplete gamma ``int_0^x exp(-t) t^(alpha-1) dt``."""
    return gamma_p(alpha, x) * math.exp(gamma_ln(alpha))


def array_factor(n_elements: int, nu: float) -> float:
    """Normalized ULA power gain ``|sum_k exp(j k nu)|^2 / N``.

    Takes values in ``[0, N]``; the peak ``N`` is reached where
    ``sin(nu / 2)`` vanishes, including ``nu`` values that only reach a
    multiple of ``2 pi`` up to roundoff.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    # shifting nu/2 by a multiple of pi leaves the squared ratio unchanged;
    # reducing first keeps n * half accurate near the grating peaks
    half = math.remainder(0.5 * nu, math.pi)
    s = math.sin(half)
    if abs(s) < 1e-9:
        return float(n_elements)
    ratio = math.sin(n_elements * half) / s
    return ratio * ratio / n_elements
