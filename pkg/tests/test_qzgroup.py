from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from twistcert.errors import NotInSubgroup
from twistcert.qzgroup import GeneratorChain, RationalAngle, decompose, order, recombine, split


def brute_force(g, chain, levels):
    """Exhaustive search over a_j < k_j."""
    for digits in product(*(range(k) for k in chain.ks[:levels])):
        if sum(Fraction(a, chain.k_leq(j)) for j, a in enumerate(digits)) % 1 == g.fraction():
            return digits
    return None


def test_order_examples():
    assert order(RationalAngle(1, 2)) == 2
    assert order(RationalAngle(0, 1)) == 1
    assert order(RationalAngle(5, 6)) == 6
    assert min(n for n in range(1, 20) if (n * Fraction(5, 6)).denominator == 1) == 6


def test_reduction_invariants():
    g = RationalAngle(10, 12)
    assert (g.num, g.den) == (5, 6)
    assert RationalAngle(7, 6) == RationalAngle(1, 6)
    assert RationalAngle(-1, 6) == RationalAngle(5, 6)


def test_decompose_examples():
    c = GeneratorChain((2, 3))
    assert decompose(RationalAngle(5, 6), c) == (1, 2)
    assert brute_force(RationalAngle(5, 6), c, 2) == (1, 2)
    assert decompose(RationalAngle(0, 1), c) == ()
    assert decompose(RationalAngle(1, 2), c) == (1,)


def test_split_examples():
    c = GeneratorChain((2, 3))
    assert split(RationalAngle(5, 6), 0, c) == (RationalAngle(1, 2), RationalAngle(1, 3))
    assert split(RationalAngle(1, 2), 0, c) == (RationalAngle(1, 2), RationalAngle(0, 1))
    assert split(RationalAngle(5, 6), 1, c) == (RationalAngle(5, 6), RationalAngle(0, 1))


def test_not_in_subgroup():
    with pytest.raises(NotInSubgroup):
        decompose(RationalAngle(1, 5), GeneratorChain((2, 3)))
    with pytest.raises(NotInSubgroup):
        split(RationalAngle(1, 4), 0, GeneratorChain((2, 3)))


def test_chain_validation():
    with pytest.raises(ValueError):
        GeneratorChain((3, 2))
    with pytest.raises(ValueError):
        GeneratorChain((2, 1))


def test_extension_on_demand():
    c = GeneratorChain((2, 3)).extended_to(10)
    assert c.ks == (2, 3, 5)
    assert decompose(RationalAngle(1, 5), c) == (0, 1, 1)
    assert recombine((0, 1, 1), c) == RationalAngle(1, 5)
    assert GeneratorChain((2, 3)).extended_to(6).ks == (2, 3)


def test_generator_relations():
    for ks in [(2, 3, 5), (2, 2, 2, 2), (4, 7, 3)]:
        c = GeneratorChain(ks)
        for j in range(len(ks)):
            assert order(c.generator(j)) == c.k_leq(j)
            if j:
                assert c.generator(j) ** ks[j] == c.generator(j - 1)


def test_small_chain_matches_brute_force():
    c = GeneratorChain((2, 3, 2))
    for n in range(12):
        g = RationalAngle(n, 12)
        digits = decompose(g, c)
        assert brute_force(g, c, 3)[: len(digits)] == digits


@given(st.sampled_from([(2, 3, 5), (2, 2, 2, 2), (6, 5)]), st.integers(0, 10**6))
def test_round_trip_property(ks, n):
    c = GeneratorChain(ks)
    top = c.k_leq(len(ks) - 1)
    g = RationalAngle(n % top, top)
    digits = decompose(g, c)
    assert all(0 <= a < k for a, k in zip(digits, ks))
    assert not digits or digits[-1] != 0
    assert recombine(digits, c) == g
    for j in range(len(ks)):
        lo, hi = split(g, j, c)
        assert lo * hi == g
