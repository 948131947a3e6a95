"""Exact arithmetic in Q/Z and nested cyclic generator chains.

Elements are reduced fractions mod 1, written additively internally; the
group law is exposed as ``*`` (and ``**`` for integer powers) so that
products of generators read the way they are usually written.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

from .errors import NotInSubgroup


@dataclass(frozen=True, order=True)
class RationalAngle:
    num: int
    den: int = 1

    def __post_init__(self):
        if self.den < 1:
            raise ValueError("den must be >= 1")
        g = gcd(self.num, self.den)
        object.__setattr__(self, "num", (self.num // g) % (self.den // g))
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def of(cls, x) -> "RationalAngle":
        f = Fraction(x)
        return cls(f.numerator, f.denominator)

    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __mul__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.of(self.fraction() + other.fraction())

    def __pow__(self, n: int) -> "RationalAngle":
        return RationalAngle.of(n * self.fraction())

    def inverse(self) -> "RationalAngle":
        return RationalAngle(-self.num, self.den)

    def __str__(self):
        return f"{self.num}/{self.den}"


IDENTITY = RationalAngle(0, 1)


def order(g: RationalAngle) -> int:
    return g.den


@dataclass(frozen=True)
class GeneratorChain:
    ks: tuple

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        object.__setattr__(self, "ks", ks)
        if not ks:
            raise ValueError("chain must contain at least one index")
        if ks[0] % 2:
            raise ValueError("k_0 must be even")
        if any(k < 2 for k in ks):
            raise ValueError("every k_j must be at least 2")

    def __len__(self):
        return len(self.ks)

    def k_leq(self, j: int) -> int:
        return prod(self.ks[: j + 1])

    def generator(self, j: int) -> RationalAngle:
        return RationalAngle(1, self.k_leq(j))

    def level(self, g: RationalAngle) -> int:
        """Smallest J with order(g) | k_{<=J}."""
        for j in range(len(self.ks)):
            if self.k_leq(j) % g.den == 0:
                return j
        raise NotInSubgroup(f"{g} is not in the subgroup generated by chain {self.ks}")

    def extended_to(self, den: int) -> "GeneratorChain":
        """Append one index so that elements of order ``den`` are covered."""
        top = self.k_leq(len(self.ks) - 1)
        extra = den // gcd(den, top)
        return self if extra == 1 else GeneratorChain(self.ks + (extra,))


def decompose(g: RationalAngle, chain: GeneratorChain) -> tuple:
    """Mixed-radix digits a_j < k_j with sum a_j / k_{<=j} = g mod 1."""
    if g.num == 0:
        return ()
    top = chain.level(g)
    n = g.num * (chain.k_leq(top) // g.den)
    digits = []
    for j in range(top, -1, -1):
        n, a = divmod(n, chain.ks[j])
        digits.append(a)
    digits.reverse()
    while digits and digits[-1] == 0:
        digits.pop()
    return tuple(digits)


def recombine(digits, chain: GeneratorChain) -> RationalAngle:
    out = IDENTITY
    for j, a in enumerate(digits):
        out = out * chain.generator(j) ** a
    return out


def split(g: RationalAngle, j: int, chain: GeneratorChain):
    """(gamma_{<=j}, gamma_{>j}) with product g."""
    digits = decompose(g, chain)
    return recombine(digits[: j + 1], chain), recombine((0,) * (j + 1) + digits[j + 1:], chain)
