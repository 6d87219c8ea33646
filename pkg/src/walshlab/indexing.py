"""Binary-digit bookkeeping for Walsh frequencies.

For n = Σ_j ε_j(n) 2^j the quantities used throughout:

    digit(j)  = ε_j(n)
    order     = |n| = max{s : ε_s(n) = 1}          (undefined for n = 0)
    upper(s)  = n^(s) = Σ_{j>=s} ε_j(n) 2^j
    lower(s)  = n(s)  = Σ_{j=0}^{s} ε_j(n) 2^j     (inclusive of s)

so that n = upper(s) + lower(s-1) for every s >= 1.
"""
from __future__ import annotations

from typing import NamedTuple


class WalshIndex(int):
    """A nonnegative integer with dyadic-digit accessors."""

    def __new__(cls, value: int) -> "WalshIndex":
        value = int(value)
        if value < 0:
            raise ValueError(f"Walsh index must be nonnegative, got {value}")
        return super().__new__(cls, value)

    def digit(self, j: int) -> int:
        if j < 0:
            return 0
        return (self >> j) & 1

    @property
    def order(self) -> int:
        if self == 0:
            raise ValueError("order |n| is undefined for n = 0")
        return self.bit_length() - 1

    def upper(self, s: int) -> int:
        """n^(s): digits at positions >= s."""
        if s < 0:
            raise ValueError(f"s must be >= 0, got {s}")
        return (self >> s) << s

    def lower(self, s: int) -> int:
        """n(s): digits at positions 0..s inclusive; lower(-1) = 0."""
        if s < -1:
            raise ValueError(f"s must be >= -1, got {s}")
        if s == -1:
            return 0
        return int(self) & ((1 << (s + 1)) - 1)

    def digits(self) -> list[int]:
        """Positions of nonzero digits, ascending."""
        return [j for j in range(self.bit_length()) if (self >> j) & 1]


class BitDigits(NamedTuple):
    order: int
    digit: int
    upper: int
    lower: int


def bit_digits(n: int, s: int) -> BitDigits:
    """(|n|, ε_s(n), n^(s), n(s)) — integer-exact; |n| needs n >= 1."""
    idx = WalshIndex(n)
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    return BitDigits(idx.order, idx.digit(s), idx.upper(s), idx.lower(s))
