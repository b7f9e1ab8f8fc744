"""Integer polynomial bookkeeping for Morse-theoretic census checks.

All arithmetic is exact integer arithmetic; the consistency relation
M(t) = P(t) + (1 + t) R(t) with R >= 0 is an integrality statement and
is never checked in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with integer coefficients; index = degree, trailing zeros trimmed."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1 if self.coefficients else -1

    def __getitem__(self, k: int) -> int:
        return self.coefficients[k] if 0 <= k < len(self.coefficients) else 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        size = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(tuple(self[k] + other[k] for k in range(size)))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        size = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(tuple(self[k] - other[k] for k in range(size)))

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if not self.coefficients or not other.coefficients:
            return IntPolynomial(())
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def evaluate(self, t: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def is_zero(self) -> bool:
        return not self.coefficients

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}t" if c != 1 else "t")
            else:
                parts.append(f"{c}t^{k}" if c != 1 else f"t^{k}")
        return " + ".join(parts)


@dataclass(frozen=True)
class ConsistencyResult:
    """Outcome of the Morse relation check M = P + (1+t) R with R >= 0.

    On failure, ``reason`` is "not_divisible" or "negative_coefficient"
    and ``degree`` locates the first violated coefficient.
    """

    ok: bool
    r: IntPolynomial | None = None
    reason: str | None = None
    degree: int | None = None


def poincare_polynomial(n: int, reduced: bool = False) -> IntPolynomial:
    """Poincare polynomial of the collision-free planar N-point space.

    The full product is prod_{j=1}^{N-1} (1 + j t); with ``reduced=True``
    the factor (1 + t) is divided out, which is the normalization the
    rotation-quotient census checks use.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    start = 2 if reduced else 1
    poly = IntPolynomial((1,))
    for j in range(start, n):
        poly = poly * IntPolynomial((1, j))
    return poly


def morse_polynomial(census: Iterable[tuple[int, int]]) -> IntPolynomial:
    """Sum multiplicity * t^index over a census of (morse_index, multiplicity)."""
    counts: dict[int, int] = {}
    for index, mult in census:
        if index < 0:
            raise ValueError(f"morse index must be >= 0, got {index}")
        if mult < 1:
            raise ValueError(f"multiplicity must be >= 1, got {mult}")
        counts[index] = counts.get(index, 0) + int(mult)
    if not counts:
        return IntPolynomial(())
    out = [0] * (max(counts) + 1)
    for k, v in counts.items():
        out[k] = v
    return IntPolynomial(tuple(out))


def morse_consistency(m: IntPolynomial, p: IntPolynomial) -> ConsistencyResult:
    """Divide M - P by (1 + t) exactly and demand non-negative coefficients.

    Failure is returned as a value, never raised: the first violated
    constraint is identified (non-divisibility shows up as a nonzero
    remainder; otherwise the lowest negative coefficient of R).
    """
    diff = m - p
    if diff.is_zero():
        return ConsistencyResult(True, IntPolynomial(()))
    # Synthetic division by (t + 1), ascending: r_k = d_k - r_{k-1}.
    r_coeffs: list[int] = []
    prev = 0
    for k in range(diff.degree + 1):
        cur = diff[k] - prev
        r_coeffs.append(cur)
        prev = cur
    if r_coeffs and r_coeffs[-1] != 0:
        return ConsistencyResult(False, None, "not_divisible", diff.degree)
    r = IntPolynomial(tuple(r_coeffs[:-1]))
    for k in range(r.degree + 1):
        if r[k] < 0:
            return ConsistencyResult(False, None, "negative_coefficient", k)
    return ConsistencyResult(True, r)
