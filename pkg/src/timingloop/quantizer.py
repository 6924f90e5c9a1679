"""Infinite tree-structured quantizer on [-L, L].

Each level bisects the current cell; bit 0 is the left half. Cells are
half-open ``[lo, hi)``, so a value on a midpoint goes right. All interval
arithmetic is done with exact rationals, so depths far beyond the 53 bits of
a double stay correct; closed-loop simulations over hundreds of steps rely on
that.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class BitPath:
    """Most-significant-first bit sequence identifying a quantizer cell."""

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @property
    def depth(self) -> int:
        return len(self.bits)

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    def as_int(self) -> int:
        """The path read as a binary integer; selects a codebook row."""
        return int(str(self), 2) if self.bits else 0

    @classmethod
    def from_int(cls, value: int, depth: int) -> "BitPath":
        if depth < 0 or not 0 <= value < (1 << depth):
            raise ValueError(f"{value} does not fit in {depth} bits")
        return cls(tuple((value >> (depth - 1 - i)) & 1 for i in range(depth)))

    @classmethod
    def from_string(cls, text: str) -> "BitPath":
        return cls(tuple(int(c) for c in text))

    def is_prefix_of(self, other: "BitPath") -> bool:
        return other.bits[: self.depth] == self.bits

    def interval(self, L: float) -> tuple[float, float]:
        lo, hi = exact_interval(self, L)
        return float(lo), float(hi)


def _cell_index(x0: float, L: float, depth: int) -> int:
    # floor of the position of x0 in units of 2L / 2^depth, exact
    offset = (Fraction(x0) + Fraction(L)) * (1 << depth) / (2 * Fraction(L))
    return offset.numerator // offset.denominator


def quantize(x0: float, L: float, depth: int) -> BitPath:
    if not L > 0:
        raise ValueError("L must be positive")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if not abs(x0) < L:
        raise ValueError(f"|x0| must be below L={L}, got {x0}")
    return BitPath.from_int(_cell_index(x0, L, depth), depth)


def quantize_index(x0: float, L: float, depth: int) -> int:
    """Same as ``quantize(...).as_int()`` without building the path."""
    if not abs(x0) < L:
        raise ValueError(f"|x0| must be below L={L}, got {x0}")
    return _cell_index(x0, L, depth)


def exact_interval(path: BitPath, L: float) -> tuple[Fraction, Fraction]:
    """Cell ``[lo, hi)`` of ``path`` as exact rationals."""
    width = 2 * Fraction(L) / (1 << path.depth)
    lo = -Fraction(L) + path.as_int() * width
    return lo, lo + width


def exact_midpoint(path: BitPath, L: float) -> Fraction:
    lo, hi = exact_interval(path, L)
    return (lo + hi) / 2


def dequantize(path: BitPath, L: float) -> float:
    """Midpoint of the cell; within ``L / 2**depth`` of any point in it."""
    return float(exact_midpoint(path, L))


def residual(x0: float, path: BitPath, L: float) -> float:
    """``x0 - dequantize(path)`` evaluated exactly, then rounded once."""
    return float(Fraction(x0) - exact_midpoint(path, L))


def path_prefix(path: BitPath, k: int) -> BitPath:
    if not 0 <= k <= path.depth:
        raise ValueError(f"prefix length {k} outside [0, {path.depth}]")
    return BitPath(path.bits[:k])
