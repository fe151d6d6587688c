"""Arithmetic and addressing on finite truncations of the d-adic integers.

A word is a finite digit string over {0, ..., d-1}, least significant digit
first, standing for a nonnegative integer below d**depth. All operations are
pure; words are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegreeMismatch, Overflow

__all__ = ["DadicWord", "word_from_integer", "add_one", "agreement_depth"]


@dataclass(frozen=True)
class DadicWord:
    """Finite base-d digit word; ``digits[0]`` is the least significant."""

    d: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"degree must be >= 2, got {self.d}")
        if not isinstance(self.digits, tuple):
            object.__setattr__(self, "digits", tuple(self.digits))
        for a in self.digits:
            if not 0 <= a < self.d:
                raise ValueError(f"digit {a} out of range for degree {self.d}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def integer_value(self) -> int:
        k = 0
        for a in reversed(self.digits):
            k = k * self.d + a
        return k

    def truncated(self, depth: int) -> "DadicWord":
        return DadicWord(self.d, self.digits[:depth])

    def padded(self, depth: int) -> "DadicWord":
        """Zero-pad up to ``depth`` (same integer value)."""
        if depth <= self.depth:
            return self
        return DadicWord(self.d, self.digits + (0,) * (depth - self.depth))


def word_from_integer(k: int, d: int, depth: int) -> DadicWord:
    """Base-d expansion of k, zero-padded to ``depth`` digits."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k >= d**depth:
        raise Overflow(f"{k} >= {d}^{depth}")
    digits = []
    for _ in range(depth):
        k, a = divmod(k, d)
        digits.append(a)
    return DadicWord(d, tuple(digits))


def add_one(w: DadicWord) -> DadicWord:
    """Add 1 with carry propagation; depth grows by one on overflow."""
    digits = list(w.digits)
    for i in range(len(digits)):
        if digits[i] + 1 < w.d:
            digits[i] += 1
            break
        digits[i] = 0
    else:
        digits.append(1)
    return DadicWord(w.d, tuple(digits))


def agreement_depth(a: DadicWord, b: DadicWord) -> int | None:
    """Largest n such that digits 0..n coincide after zero-padding.

    Returns None ("disjoint") when digit 0 already differs. Symmetric in
    its arguments; for a word against its own padding it is the full
    common depth minus one.
    """
    if a.d != b.d:
        raise DegreeMismatch(f"degrees differ: {a.d} != {b.d}")
    depth = max(a.depth, b.depth)
    da = a.padded(depth).digits
    db = b.padded(depth).digits
    n = None
    for i in range(depth):
        if da[i] != db[i]:
            break
        n = i
    return n
