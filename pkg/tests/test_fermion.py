import numpy as np
import pytest

from phasegrass import fock
from phasegrass.fermion import (
    CorrelationQuery,
    PRepresentation,
    all_queries,
    compute_p,
    compute_phi,
    convert,
    correlation_direct,
    correlation_via_p,
    correlation_via_phi,
    g_registry,
    normalization,
    pair_state,
    reconstruct,
    single_mode_state,
    weight,
)
from phasegrass.grassmann import GrassmannPoly, RegistryError

R1 = g_registry(1)
R2 = g_registry(2)


def gg(reg, mode):
    g, gs = reg.pair(mode)
    return GrassmannPoly.generator(reg, g) * GrassmannPoly.generator(reg, gs)


def test_single_mode_closed_forms():
    rho = single_mode_state(0.25)
    assert compute_p(rho).poly == -0.25 + gg(R1, 1)
    assert compute_phi(rho).poly == 0.25 + 0.5 * gg(R1, 1)


def test_vacuum_forms():
    rho = single_mode_state(0.0)
    assert compute_p(rho).poly == gg(R1, 1)
    assert compute_phi(rho).poly == gg(R1, 1)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_structural_forms(p):
    # phi = u + (1-2u) gg*, P = v + gg*: constant and gg* coefficient only
    phi, P = compute_phi(single_mode_state(p)).poly, compute_p(single_mode_state(p)).poly
    assert set(phi.terms) <= {(), (0, 1)} and set(P.terms) <= {(), (0, 1)}
    u = phi.constant()
    assert abs(phi.terms.get((0, 1), 0) - (1 - 2 * u)) < 1e-12
    assert abs(P.terms.get((0, 1), 0) - 1) < 1e-12


def test_product_state_phi():
    p1, p2 = 0.2, 0.7
    rho = np.kron(single_mode_state(p1), single_mode_state(p2))
    expected = (p1 + (1 - 2 * p1) * gg(R2, 1)) * (p2 + (1 - 2 * p2) * gg(R2, 2))
    assert compute_phi(rho).poly.max_abs_diff(expected) < 1e-12
    assert convert(compute_phi(rho)).poly.max_abs_diff(compute_p(rho).poly) < 1e-12


def test_reconstruct_hand_expansion():
    p = 0.3
    rep = PRepresentation("phi", 1, p + (1 - 2 * p) * gg(R1, 1))
    assert np.allclose(reconstruct(rep), np.diag([1 - p, p]), atol=1e-15)


def test_roundtrip_random_single_mode_mixtures():
    rng = np.random.default_rng(0)
    for p in rng.random(20):
        rho = single_mode_state(p)
        assert np.abs(reconstruct(compute_p(rho)) - rho).max() < 1e-12
        assert np.abs(reconstruct(compute_phi(rho)) - rho).max() < 1e-12


def test_roundtrip_random_two_mode():
    rng = np.random.default_rng(1)
    for _ in range(20):
        rho = fock.random_superselected_state(2, rng)
        for rep in (compute_p(rho), compute_phi(rho)):
            assert np.abs(reconstruct(rep) - rho).max() < 1e-10
            assert rep.poly.parity_split()[1].is_zero()


def test_pair_state_roundtrip():
    rho = pair_state()
    assert np.abs(reconstruct(compute_p(rho)) - rho).max() < 1e-12


def test_convert_examples():
    phi = compute_phi(single_mode_state(0.25))
    P = convert(phi)
    assert P.flavor == "p" and P.poly == -0.25 + gg(R1, 1)
    assert convert(P).poly == phi.poly


def test_convert_involution_on_random_even_polys():
    rng = np.random.default_rng(2)
    for _ in range(5):
        terms = {(): rng.normal(), (0, 1): rng.normal(), (2, 3): rng.normal(), (0, 1, 2, 3): rng.normal(), (0, 2): rng.normal()}
        rep = PRepresentation("phi", 2, GrassmannPoly.from_terms(R2, terms))
        assert convert(convert(rep)).poly.max_abs_diff(rep.poly) < 1e-14


def test_weight():
    assert weight(1) == 1 + 2 * gg(R1, 1)
    assert weight(2) == 1 + 2 * gg(R2, 1) + 2 * gg(R2, 2) + 4 * gg(R2, 1) * gg(R2, 2)


def test_normalization_values():
    rho = single_mode_state(0.25)
    assert abs(normalization(compute_p(rho)).value - 1) < 1e-14
    n = normalization(compute_phi(rho))
    assert abs(n.unweighted - 0.5) < 1e-14
    assert abs(n.weighted - 1) < 1e-14


def test_representation_json_roundtrip():
    rep = compute_p(pair_state())
    back = PRepresentation.from_dict(rep.to_dict())
    assert back.flavor == "p" and back.modes == 2 and back.poly == rep.poly


def test_representation_rejects_foreign_registry():
    with pytest.raises(RegistryError):
        PRepresentation("p", 2, GrassmannPoly.scalar(R1, 1))
    with pytest.raises(ValueError):
        PRepresentation("q", 1, GrassmannPoly.scalar(R1, 1))


# -- queries and correlations ----------------------------------------------------


def test_query_parsing():
    q = CorrelationQuery.parse("c1+ c2+ c2 c1")
    assert q.creations == (1, 2) and q.annihilations == (2, 1)
    assert str(q) == "c1+ c2+ c2 c1"
    assert str(CorrelationQuery.parse("")) == "I"
    with pytest.raises(ValueError, match="normal order"):
        CorrelationQuery.parse("c1 c1+")
    with pytest.raises(ValueError):
        CorrelationQuery.parse("a1")
    with pytest.raises(IndexError):
        CorrelationQuery.parse("c3").check(2)


def test_single_mode_moments():
    rho = single_mode_state(0.25)
    q = CorrelationQuery.parse("c1+ c1")
    assert abs(correlation_via_p(compute_p(rho), q) - 0.25) < 1e-14
    assert abs(correlation_via_phi(compute_phi(rho), q) - 0.25) < 1e-14
    assert abs(correlation_direct(rho, q) - 0.25) < 1e-14
    ident = CorrelationQuery()
    assert abs(correlation_via_phi(compute_phi(rho), ident) - 1) < 1e-14
    assert abs(correlation_direct(rho, ident) - 1) < 1e-14


def test_odd_moments_vanish():
    rho = single_mode_state(0.25)
    for text in ("c1+", "c1"):
        q = CorrelationQuery.parse(text)
        assert correlation_via_p(compute_p(rho), q) == 0
        assert correlation_via_phi(compute_phi(rho), q) == 0
        assert correlation_direct(rho, q) == 0


def test_pair_correlation():
    rho = pair_state(0.6, 0.8)
    q = CorrelationQuery.parse("c1+ c2+ c2 c1")
    for v in (correlation_via_p(compute_p(rho), q), correlation_via_phi(compute_phi(rho), q), correlation_direct(rho, q)):
        assert abs(v - 0.64) < 1e-14
    # pair coherence <c1+ c2+> survives: p - q = 2 is even
    q2 = CorrelationQuery.parse("c1+ c2+")
    assert abs(correlation_via_p(compute_p(rho), q2) - correlation_direct(rho, q2)) < 1e-14
    assert abs(correlation_direct(rho, q2)) > 0.1


def test_flavor_mismatch():
    rho = single_mode_state(0.25)
    with pytest.raises(ValueError):
        correlation_via_p(compute_phi(rho), CorrelationQuery())
    with pytest.raises(ValueError):
        correlation_via_phi(compute_p(rho), CorrelationQuery())


def test_all_queries_count():
    assert len(all_queries(2)) == sum(2**p * 2**q for p in range(3) for q in range(3))
