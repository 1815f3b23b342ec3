"""Exact extrapolation weights for multi-product expansions.

For substep counts ``k_1..k_n`` the weights solve

    sum_i c_i k_i^(-2j) = [j == 0],   j = 0..n-1

and have the closed form ``c_i = prod_{j != i} k_i^2 / (k_i^2 - k_j^2)``.
Everything here is exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class DegenerateNodesError(ValueError):
    """Two substep counts coincide, so the weight system is singular."""


@dataclass(frozen=True)
class WeightSet:
    ks: tuple[int, ...]
    cs: tuple[Fraction, ...]
    parity: str = "custom"  # even | odd | custom; advisory only

    def __post_init__(self):
        if len(self.ks) != len(self.cs):
            raise ValueError("ks and cs differ in length")

    def __len__(self) -> int:
        return len(self.ks)

    def moments(self, count: int | None = None) -> list[Fraction]:
        """``sum_i c_i k_i^(-2j)`` for j = 0..count-1 (default: n)."""
        count = len(self.ks) if count is None else count
        return [sum((c * Fraction(1, k ** (2 * j)) for k, c in zip(self.ks, self.cs)), Fraction(0))
                for j in range(count)]

    def is_consistent(self) -> bool:
        m = self.moments()
        return m[0] == 1 and all(x == 0 for x in m[1:])

    def sorted(self) -> "WeightSet":
        pairs = sorted(zip(self.ks, self.cs))
        return WeightSet(tuple(k for k, _ in pairs), tuple(c for _, c in pairs), self.parity)


def _check_nodes(ks: Sequence[int]) -> tuple[int, ...]:
    ks = tuple(int(k) for k in ks)
    if not ks:
        raise ValueError("need at least one substep count")
    if any(k < 1 for k in ks):
        raise ValueError(f"substep counts must be positive integers, got {ks}")
    if len(set(ks)) != len(ks):
        raise DegenerateNodesError(f"duplicate substep counts in {ks}")
    return ks


def _parity(ks: Iterable[int]) -> str:
    ks = tuple(ks)
    if ks == tuple(range(1, len(ks) + 1)):
        return "even"
    if ks == tuple(range(1, 2 * len(ks), 2)):
        return "odd"
    return "custom"


def closed_form_weights(ks: Sequence[int]) -> WeightSet:
    ks = _check_nodes(ks)
    cs = []
    for i, ki in enumerate(ks):
        c = Fraction(1)
        for j, kj in enumerate(ks):
            if j != i:
                c *= Fraction(ki * ki, ki * ki - kj * kj)
        cs.append(c)
    return WeightSet(ks, tuple(cs), _parity(ks))


def vandermonde_weights(ks: Sequence[int]) -> WeightSet:
    """Solve the moment system directly by exact Gaussian elimination.

    Independent of :func:`closed_form_weights`; used to cross-check it.
    """
    ks = _check_nodes(ks)
    n = len(ks)
    rows = [[Fraction(1, k ** (2 * j)) for k in ks] + [Fraction(int(j == 0))] for j in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular moment system")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return WeightSet(ks, tuple(rows[i][n] for i in range(n)), _parity(ks))


def lagrange_weights(ks: Sequence[int]) -> WeightSet:
    """Weights as Lagrange basis polynomials at 0 with nodes ``x_i = k_i^-2``."""
    ks = _check_nodes(ks)
    xs = [Fraction(1, k * k) for k in ks]
    cs = []
    for i, xi in enumerate(xs):
        c = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                c *= (0 - xj) / (xi - xj)
        cs.append(c)
    return WeightSet(ks, tuple(cs), _parity(ks))


def even_sequence(n: int) -> list[int]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(range(1, n + 1))


def odd_sequence(n: int) -> list[int]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(range(1, 2 * n, 2))


def final_correction_sequence(m: int, n: int) -> list[int]:
    """Nodes ``{m, n-1, ..., 1}`` correcting the endpoint of an m-step run to order 2n."""
    if n < 2:
        raise ValueError("half order n must be >= 2")
    if m <= n - 1:
        raise DegenerateNodesError(f"m={m} collides with the coarse nodes 1..{n - 1}")
    return [m] + list(range(n - 1, 0, -1))
