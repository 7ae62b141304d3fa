import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasegrass.grassmann import (
    GeneratorRegistry,
    GrassmannPoly,
    NilpotencyError,
    PairingError,
    RegistryError,
    berezin_integrate,
    canonicalize,
    conjugate,
    exp_nilpotent,
    integrate_d2,
    parity_split,
    substitute_negate,
)

REG = GeneratorRegistry.standard(4, ("g",))  # g1 g1* g2 g2* g3 g3* g4 g4*


def G(i, reg=REG):
    return GrassmannPoly.generator(reg, i)


def bubble_sign(seq):
    """Independent oracle: sign of the permutation by explicit adjacent swaps."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign, tuple(seq)


# -- registry ---------------------------------------------------------------


def test_standard_registry_order():
    assert REG.names() == ["g1", "g1*", "g2", "g2*", "g3", "g3*", "g4", "g4*"]
    reg = GeneratorRegistry.standard(2, ("g", "h", "k"))
    assert reg.names()[4:8] == ["h1", "h1*", "h2", "h2*"]
    assert GeneratorRegistry.standard(2).is_prefix_of(reg)


def test_registry_partner_is_involution():
    for i in range(REG.count):
        assert REG.partner(REG.partner(i)) == i
        assert REG.partner(i) != i


def test_registry_errors():
    with pytest.raises(RegistryError):
        GeneratorRegistry(((1, "g"), (1, "g")))
    with pytest.raises(RegistryError):
        GeneratorRegistry(((1, "q"),))
    with pytest.raises(RegistryError):
        REG.check(8)
    with pytest.raises(PairingError):
        GeneratorRegistry.from_strings(["g1"]).partner(0)


# -- canonicalize -----------------------------------------------------------


def test_canonicalize_examples():
    g1, g2, g3 = 0, 2, 4
    assert canonicalize(REG, [g2, g1]) == (-1, (g1, g2))
    assert canonicalize(REG, [g1, g1]) == (0, ())
    assert canonicalize(REG, [g3, g1, g2]) == (1, (g1, g2, g3))


@given(st.permutations(list(range(6))))
def test_canonicalize_matches_bubble_sort(perm):
    assert canonicalize(REG, perm) == bubble_sign(perm)


def test_canonicalize_out_of_range():
    with pytest.raises(RegistryError):
        canonicalize(REG, [0, 99])


# -- multiply ----------------------------------------------------------------


def test_multiply_examples():
    g1, g2 = G(0), G(2)
    assert g1 * g2 == GrassmannPoly.from_terms(REG, {(0, 2): 1})
    assert g2 * g1 == -(g1 * g2)
    x = 1 + G(0) * G(1)
    assert x * x == 1 + 2 * G(0) * G(1)
    odd3 = G(0) * G(2) * G(4)
    assert odd3 * G(6) == -(G(6) * odd3)


def test_multiply_registry_mismatch():
    other = GeneratorRegistry.standard(1)
    with pytest.raises(RegistryError):
        G(0) * GrassmannPoly.generator(other, 0)


# random sparse polynomials over up to 8 generators
@st.composite
def polys(draw, reg=REG, max_terms=6):
    n = reg.count
    terms = draw(
        st.dictionaries(
            st.frozensets(st.integers(0, n - 1), max_size=4).map(lambda s: tuple(sorted(s))),
            st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda t: complex(*t)),
            max_size=max_terms,
        )
    )
    return GrassmannPoly.from_terms(reg, terms)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_associativity(p, q, r):
    assert ((p * q) * r).max_abs_diff(p * (q * r)) < 1e-9


@given(st.integers(0, 7), st.integers(0, 7))
def test_anticommutativity_and_nilpotency(a, b):
    if a == b:
        assert (G(a) * G(a)).is_zero()
    else:
        assert G(a) * G(b) == -(G(b) * G(a))


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_even_elements_are_central(p, q):
    even, _ = parity_split(p)
    assert (even * q).max_abs_diff(q * even) < 1e-9


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_conjugation_is_anti_homomorphism(p, q):
    assert conjugate(p * q).max_abs_diff(conjugate(q) * conjugate(p)) < 1e-9
    assert conjugate(conjugate(p)).max_abs_diff(p) < 1e-12


@settings(max_examples=60, deadline=None)
@given(polys())
def test_odd_polynomials_integrate_to_zero(p):
    _, odd = parity_split(p)
    assert integrate_d2(odd, REG.pairs("g")).is_zero()


@settings(max_examples=40, deadline=None)
@given(polys())
def test_integral_of_generator_times_free_poly(p):
    # int dg (g p) = p when p does not contain g
    g = 0
    free = GrassmannPoly.from_terms(REG, {m: c for m, c in p.terms.items() if g not in m})
    assert berezin_integrate(G(g) * free, g) == free


# -- conjugation ------------------------------------------------------------


def test_conjugate_examples():
    x = GrassmannPoly.generator(REG, 0, 2 + 3j)
    assert conjugate(x) == GrassmannPoly.generator(REG, 1, 2 - 3j)
    # (g g*)^* = g** g* = g g*: self-conjugate
    gg = G(0) * G(1)
    assert conjugate(gg) == gg
    p = 1 + 0.7 * gg
    assert conjugate(conjugate(p)) == p


def test_conjugate_two_generator_by_hand():
    # (g1 g2)^* = g2* g1* = -g1* g2*
    assert conjugate(G(0) * G(2)) == -(G(1) * G(3))


# -- integration -------------------------------------------------------------


def test_berezin_examples():
    one = GrassmannPoly.scalar(REG, 1)
    assert berezin_integrate(G(0), 0) == one
    assert berezin_integrate(one, 0).is_zero()
    g, h = 0, 2
    # int dh int dg (g h) = 1 and (h g) gives -1
    assert berezin_integrate(berezin_integrate(G(g) * G(h), g), h) == one
    assert berezin_integrate(berezin_integrate(G(h) * G(g), g), h) == -one


def test_integrate_d2_examples():
    pair = [REG.pair(1)]
    g, gs = G(0), G(1)
    assert integrate_d2(g * gs, pair).constant() == 1
    assert integrate_d2(GrassmannPoly.scalar(REG, 1), pair).is_zero()
    assert integrate_d2(gs * g, pair).constant() == -1


def test_integrate_d2_mode_order_irrelevant_for_even():
    rng = np.random.default_rng(3)
    terms = {m: complex(*rng.normal(size=2)) for d in (0, 2, 4) for m in itertools.combinations(range(4), d)}
    p = GrassmannPoly.from_terms(REG, terms)
    pairs = REG.pairs("g", (1, 2))
    assert integrate_d2(p, pairs) == integrate_d2(p, pairs[::-1])


# -- negate, split, exp --------------------------------------------------------


def test_substitute_negate_examples():
    p = 0.3
    x = p + (1 - 2 * p) * G(0) * G(1)
    assert substitute_negate(x, [1]) == p - (1 - 2 * p) * G(0) * G(1)
    assert substitute_negate(x, []) == x
    assert substitute_negate(G(0) * G(1), [0, 1]) == G(0) * G(1)


def test_parity_split_examples():
    p = 1 + G(0) + G(0) * G(2)
    even, odd = parity_split(p)
    assert even == 1 + G(0) * G(2)
    assert odd == G(0)
    f = (2 * G(0) * G(1) - 1) * (2 * G(2) * G(3) - 1)
    assert parity_split(f)[1].is_zero()
    assert even + odd == p


def test_exp_examples():
    g, gs = G(0), G(1)
    assert exp_nilpotent(-0.5 * gs * g) == 1 - 0.5 * gs * g
    assert exp_nilpotent(GrassmannPoly.zero(REG)) == GrassmannPoly.scalar(REG, 1)
    h, hs = G(2), G(3)
    lhs = exp_nilpotent(hs * g) * exp_nilpotent(-gs * h)
    assert lhs == 1 + hs * g - gs * h - hs * g * gs * h


def test_exp_rejects_constant():
    with pytest.raises(NilpotencyError):
        exp_nilpotent(1 + G(0) * G(1))


def test_exp_of_sum_of_commuting_even():
    a = G(0) * G(1)
    b = G(2) * G(3)
    assert exp_nilpotent(a + b) == exp_nilpotent(a) * exp_nilpotent(b)


# -- storage and serialization -------------------------------------------------


def test_dedup_threshold_drops_tiny_terms():
    p = GrassmannPoly.from_terms(REG, {(): 1.0, (0,): 1e-14})
    assert len(p) == 1


def test_json_roundtrip_and_defensive_read():
    p = 0.25 - 1j * G(0) * G(1) + G(2)
    q = GrassmannPoly.from_json(p.to_json())
    assert q == p
    data = json.loads(p.to_json())
    # non-canonical monomial order on input is re-sorted with its sign
    data["terms"] = [{"monomial": [3, 2], "re": 1.0, "im": 0.0}]
    assert GrassmannPoly.from_dict(data) == -(G(2) * G(3))


def test_str_format():
    assert str(-0.25 + G(0) * G(1)) == "-0.25 + g1 g1*"
    assert str(GrassmannPoly.zero(REG)) == "0"
