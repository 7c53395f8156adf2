"""Fixed-width bit strings with 1-based, MSB-first indexing, plus exact
binary-fraction windows.

Everything here is pure integer arithmetic; no float ever enters a bit
computation. All values are immutable, so they are safe to share across
threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

MAX_WIDTH = 64


@dataclass(frozen=True)
class BitString:
    """A word of ``width`` bits; position 1 is the most significant bit."""

    width: int
    value: int

    def __post_init__(self) -> None:
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in 1..{MAX_WIDTH}, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_string(cls, text: str) -> "BitString":
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(len(text), int(text, 2))

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def __len__(self) -> int:
        return self.width

    def bit(self, i: int) -> int:
        """Bit at position ``i``, counting 1-based from the MSB."""
        if not 1 <= i <= self.width:
            raise IndexError(f"bit index {i} outside 1..{self.width}")
        return (self.value >> (self.width - i)) & 1

    def slice(self, i: int, j: int) -> "BitString":
        """Bits ``i..j`` inclusive, 1-based from the MSB."""
        if not 1 <= i <= j <= self.width:
            raise IndexError(f"slice [{i},{j}] outside 1..{self.width}")
        width = j - i + 1
        return BitString(width, (self.value >> (self.width - j)) & ((1 << width) - 1))

    def concat(self, other: "BitString") -> "BitString":
        return BitString(self.width + other.width, (self.value << other.width) | other.value)


def circ_dist(x: BitString, y: BitString) -> int:
    """Circular distance min(|x-y|, 2^t - |x-y|) on equal-width words."""
    if x.width != y.width:
        raise ValueError(f"width mismatch: {x.width} vs {y.width}")
    diff = abs(x.value - y.value)
    return min(diff, (1 << x.width) - diff)


def wrap_add(x: BitString, b: int) -> BitString:
    """x + b reduced modulo 2^width, keeping the width.

    ``b`` may be any signed integer.
    """
    return BitString(x.width, (x.value + b) % (1 << x.width))


def fraction_bits(numerator: int, denominator: int, i: int, j: int) -> BitString:
    """Bits ``i..j`` of the binary expansion of numerator/denominator.

    Bit m is floor(2^m * numerator / denominator) mod 2; terminating
    expansions continue with zeros. Computed by exact integer doubling so
    the window is bit-perfect at any depth.
    """
    _check_proper_fraction(numerator, denominator)
    if not 1 <= i <= j:
        raise ValueError(f"bad window [{i},{j}]")
    width = j - i + 1
    if width > MAX_WIDTH:
        raise ValueError(f"window wider than {MAX_WIDTH} bits")
    prefix = (numerator << j) // denominator
    return BitString(width, prefix & ((1 << width) - 1))


def nearest_window(numerator: int, denominator: int, t: int) -> BitString:
    """The t-bit word minimising the circular deviation |2^t*w - m| mod 2^t,
    where w = numerator/denominator.

    A deviation of exactly 1/2 resolves to the truncation, so fixtures built
    from this are deterministic.
    """
    _check_proper_fraction(numerator, denominator)
    if not 1 <= t <= MAX_WIDTH:
        raise ValueError(f"width must be in 1..{MAX_WIDTH}, got {t}")
    q, rem = divmod(numerator << t, denominator)
    if 2 * rem > denominator:
        q += 1
    return BitString(t, q % (1 << t))


def _check_proper_fraction(numerator: int, denominator: int) -> None:
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    if not 0 <= numerator < denominator:
        raise ValueError(f"need 0 <= numerator < denominator, got {numerator}/{denominator}")


@dataclass(frozen=True)
class FractionWindow:
    """A window [start, end] into the binary expansion of a rational in [0, 1)."""

    numerator: int
    denominator: int
    start: int
    end: int

    def __post_init__(self) -> None:
        _check_proper_fraction(self.numerator, self.denominator)
        if not 1 <= self.start <= self.end:
            raise ValueError(f"bad window [{self.start},{self.end}]")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def bits(self) -> BitString:
        return fraction_bits(self.numerator, self.denominator, self.start, self.end)

    def tail_fraction(self) -> Fraction:
        """The value 0.b_start b_{start+1} ... as an exact rational.

        This is the fractional part of 2^(start-1) * numerator/denominator.
        """
        shifted = (self.numerator << (self.start - 1)) % self.denominator
        return Fraction(shifted, self.denominator)
