"""Precision-parameterized scalars, small dense matrices and the matrix exponential.

Two precision levels are supported.  ``double`` uses IEEE binary64 through
numpy float arrays.  ``extended`` uses mpmath ``mpf`` values stored in numpy
object arrays, so the same array code runs unchanged at either level.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

Rational = Fraction

#: default digits for the extended level
EXTENDED_DPS = 40


class DimensionError(ValueError):
    """Raised when a matrix has the wrong shape for an operation."""


class MatrixOverflowError(OverflowError):
    """Raised when a matrix exponential leaves the representable range."""


@dataclass(frozen=True)
class Precision:
    """A run-wide precision level.

    ``name`` is recorded verbatim in every CSV header.  For the extended
    level, arithmetic must happen inside :meth:`context` so that mpmath
    works at ``dps`` digits.
    """

    name: str
    dps: int

    @property
    def is_extended(self) -> bool:
        return self.name == "extended"

    @property
    def eps(self):
        if self.is_extended:
            return mpmath.mpf(2) ** (1 - mpmath.mp.prec)
        return np.finfo(float).eps

    @contextlib.contextmanager
    def context(self) -> Iterator["Precision"]:
        if self.is_extended:
            with mpmath.workdps(self.dps):
                yield self
        else:
            yield self

    def real(self, x):
        """Convert a number (int, float, Fraction, str, mpf) to a scalar at this level."""
        if isinstance(x, Fraction):
            return rational_to_real(x, self)
        if self.is_extended:
            return mpmath.mpf(x)
        return float(x)

    def array(self, values) -> np.ndarray:
        if not self.is_extended:
            return np.asarray(values, dtype=float)
        arr = np.asarray(values, dtype=object)
        return _vec_mpf(arr) if arr.ndim else mpmath.mpf(arr.item())

    def zeros(self, shape) -> np.ndarray:
        return self.array(np.zeros(shape))

    def eye(self, n: int) -> np.ndarray:
        return self.array(np.eye(n))

    def exp(self, x):
        if self.is_extended:
            return _vec_exp(x) if isinstance(x, np.ndarray) else mpmath.exp(x)
        return np.exp(x)

    def sqrt(self, x):
        return mpmath.sqrt(x) if self.is_extended else math.sqrt(x)

    def format(self, x) -> str:
        """Scientific notation with 17 (double) or at least 34 (extended) significant digits."""
        if self.is_extended:
            digits = max(34, self.dps)
            return mpmath.nstr(mpmath.mpf(x), digits, min_fixed=1, max_fixed=0, strip_zeros=False)
        return f"{float(x):.16e}"


_vec_mpf = np.frompyfunc(mpmath.mpf, 1, 1)
_vec_exp = np.frompyfunc(mpmath.exp, 1, 1)

DOUBLE = Precision("double", 16)
EXTENDED = Precision("extended", EXTENDED_DPS)


def get_precision(name: str, dps: int | None = None) -> Precision:
    if name == "double":
        return DOUBLE
    if name == "extended":
        return Precision("extended", dps or EXTENDED_DPS)
    raise ValueError(f"unknown precision {name!r}; expected 'double' or 'extended'")


def precision_of(x) -> Precision:
    """Guess the precision level a value or array was built at."""
    if isinstance(x, np.ndarray):
        return EXTENDED if x.dtype == object else DOUBLE
    return EXTENDED if isinstance(x, mpmath.mpf) else DOUBLE


def rational_to_real(r: Fraction, precision: Precision = DOUBLE):
    """Nearest representable value of ``r`` at the given precision."""
    r = Fraction(r)
    if precision.is_extended:
        return mpmath.mpf(r.numerator) / r.denominator
    # Fraction.__float__ is correctly rounded
    return float(r)


def _inf_norm(m: np.ndarray):
    return max(sum(abs(x) for x in row) for row in m)


def expm(m: np.ndarray, scale=1) -> np.ndarray:
    """exp(scale * m) by scaling and squaring with a truncated Taylor series.

    The series is summed until the next term is below the working epsilon
    times the norm of the partial sum, so the routine is exact to the
    precision of the array's entries (float64 or mpf).
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expm needs a square matrix, got shape {m.shape}")
    prec = precision_of(m)
    a = m * scale
    n = a.shape[0]
    norm = _inf_norm(a)
    norm_f = float(norm)
    if not math.isfinite(norm_f):
        raise MatrixOverflowError("non-finite entries in expm argument")
    squarings = max(0, math.ceil(math.log2(norm_f / 0.5))) if norm_f > 0.5 else 0
    a = a / (2**squarings)
    eps = prec.eps
    result = prec.eye(n)
    term = result.copy()
    for j in range(1, 200):
        term = (term @ a) / j
        result = result + term
        if _inf_norm(term) <= eps * _inf_norm(result):
            break
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            result = result @ result
    if not prec.is_extended and not np.all(np.isfinite(result)):
        raise MatrixOverflowError("matrix exponential overflowed double precision")
    return result


def two_sum(a, b):
    s = a + b
    bp = s - a
    err = (a - (s - bp)) + (b - bp)
    return s, err


def weighted_sum(weights: Sequence, terms: Sequence[np.ndarray]) -> np.ndarray:
    """Compensated (Neumaier) accumulation of ``sum(w * x)`` over branches.

    For extended-precision terms plain summation is used; the working
    precision already sits far below the kernel round-off.
    """
    if len(weights) != len(terms):
        raise ValueError("weights and terms differ in length")
    if isinstance(terms[0], np.ndarray) and terms[0].dtype == object:
        total = weights[0] * terms[0]
        for w, x in zip(weights[1:], terms[1:]):
            total = total + w * x
        return total
    total = np.asarray(weights[0] * terms[0], dtype=float)
    comp = np.zeros_like(total)
    for w, x in zip(weights[1:], terms[1:]):
        total, err = two_sum(total, w * x)
        comp = comp + err
    return total + comp
