import json
import warnings
from math import factorial

import numpy as np
import pytest

from phasegrass import boson
from phasegrass.boson import ComplexGrid, PNotRepresentableError, TruncatedBosonSpace, TruncationWarning

SP20 = TruncatedBosonSpace(20)
BLOCK = boson.reliable_block(20)


def test_commutator_outside_top_level():
    c = SP20.a @ SP20.adag - SP20.adag @ SP20.a
    assert np.allclose(c[:-1, :-1], np.eye(19))


def test_grid_geometry():
    g = ComplexGrid(5.0, 101)
    assert g.delta == pytest.approx(0.1)
    assert g.nodes[50, 50] == 0
    assert g.nodes[0, 100] == -5 + 5j
    assert np.allclose(g.nodes, -g.nodes[::-1, ::-1], atol=1e-14)
    with pytest.raises(ValueError):
        ComplexGrid(5.0, 100)


# -- displacement ----------------------------------------------------------------


def test_displacement_identity_at_zero():
    assert np.allclose(boson.boson_displacement(0, SP20), np.eye(20))


def test_displacement_on_vacuum_matches_coherent_amplitudes():
    a = 0.5
    col = boson.boson_displacement(a, SP20)[:, 0]
    closed = np.array([np.exp(-a * a / 2) * a**n / np.sqrt(factorial(n)) for n in range(20)])
    assert np.abs(col - closed).max() < 1e-10


@pytest.mark.parametrize("alpha", [1.0, 1j, 0.7 - 0.7j, -0.5])
def test_ordered_forms_agree_on_reliable_block(alpha):
    D = boson.boson_displacement(alpha, SP20)
    assert np.abs(boson.normal_ordered_displacement(alpha, SP20) - D)[BLOCK, BLOCK].max() < 1e-8
    assert np.abs(boson.displacement_elements(alpha, 20) - D)[BLOCK, BLOCK].max() < 1e-8


@pytest.mark.parametrize("alpha", [1.0, 0.7 - 0.7j])
def test_antinormal_form_needs_headroom(alpha):
    # exp(alpha a^+) is cut at the top level before exp(-alpha^* a) acts, so the
    # antinormal product converges more slowly in d than the normal one
    exact = boson.displacement_elements(alpha, 10)
    anti = boson.antinormal_ordered_displacement(alpha, TruncatedBosonSpace(40))[:10, :10]
    assert np.abs(anti - exact).max() < 1e-8


def test_displacement_unitary():
    D = boson.boson_displacement(0.8 + 0.3j, SP20)
    assert np.abs(D @ D.conj().T - np.eye(20))[BLOCK, BLOCK].max() < 1e-8


def test_exact_elements_are_unitary_projection():
    # D(-xi) = D(xi)^dagger for the exact elements
    xi = 1.3 - 0.4j
    assert np.allclose(boson.displacement_elements(-xi, 15), boson.displacement_elements(xi, 15).conj().T)


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        boson.boson_displacement(3.0, SP20)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        boson.boson_displacement(1.0, SP20)


# -- characteristic function -------------------------------------------------------


def test_char_vacuum_is_one():
    xs = np.array([0, 1 + 1j, 3 - 2j, 5j])
    assert np.allclose(boson.char_normal(boson.vacuum_state(20), xs), 1)


def test_char_thermal_closed_form():
    xi = 0.3 + 0.4j
    chi = boson.char_normal(boson.thermal_state(1.0, 40), xi)
    assert abs(chi - np.exp(-abs(xi) ** 2)) < 1e-6


def test_char_at_origin_random_state():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    assert abs(boson.char_normal(rho, 0) - 1) < 1e-12


def test_char_against_direct_trace():
    rng = np.random.default_rng(1)
    sp = TruncatedBosonSpace(12)
    a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    xi = 0.4 - 0.2j
    from scipy.linalg import expm

    direct = np.trace(rho @ expm(xi * sp.adag) @ expm(-np.conj(xi) * sp.a))
    assert abs(boson.char_normal(rho, xi) - direct) < 1e-10


# -- P function ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def thermal1():
    return boson.p_function_grid(boson.thermal_state(1.0, 40), ComplexGrid(5.0, 101))


def test_thermal_p_shape(thermal1):
    exact = boson.thermal_p_exact(thermal1.grid.nodes, 1.0)
    assert np.abs(thermal1.real - exact).max() < 1e-3
    assert thermal1.imag_residual < 1e-6


def test_thermal_moments(thermal1):
    assert abs(boson.moment_from_p(thermal1, 0, 0) - 1) < 1e-3
    assert abs(boson.moment_from_p(thermal1, 1, 1) - 1) < 1e-3
    assert abs(boson.moment_from_p(thermal1, 0, 1)) < 1e-6
    rho = boson.thermal_state(1.0, 40)
    assert abs(boson.moment_direct(rho, 1, 1) - 1) < 1e-10


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_thermal_normalization(nbar):
    P = boson.p_function_grid(boson.thermal_state(nbar, 40), ComplexGrid(5.0, 101))
    assert abs(P.integral() - 1) < 1e-3


def test_vacuum_refused():
    with pytest.raises(PNotRepresentableError, match="not representable"):
        boson.p_function_grid(boson.vacuum_state(20), ComplexGrid(6.0, 121))


def test_vacuum_forced_is_peaked():
    P = boson.p_function_grid(boson.vacuum_state(20), ComplexGrid(6.0, 121), force=True)
    assert P.forced
    c = P.grid.points // 2
    assert np.unravel_index(np.argmax(P.real), P.real.shape) == (c, c)
    assert abs(P.integral() - 1) < 2e-2


def test_vacuum_forced_normalization_is_grid_dependent():
    # the disc cut-off of a non-decaying chi rings; the lost weight depends on the grid
    P = boson.p_function_grid(boson.vacuum_state(20), ComplexGrid(5.0, 101), force=True)
    assert 2e-2 < abs(P.integral() - 1) < 3e-2


def test_grid_json(tmp_path):
    g = ComplexGrid(2.0, 5)
    P = boson.p_function_grid(boson.thermal_state(0.2, 20), g, force=True)
    d = json.loads(json.dumps(P.to_dict()))
    assert d["xi_halfwidth"] == 2.0 and d["points"] == 5
    vals = np.array(d["values"])
    assert vals.shape == (25, 2)
    assert vals[1, 0] == P.values[0, 1].real  # row-major


# -- Weyl expansion and overlap identities ---------------------------------------------


@pytest.fixture(scope="module")
def grid6():
    return ComplexGrid(6.0, 121)


@pytest.mark.parametrize("r,c", [(0, 0), (0, 1), (2, 1)])
def test_weyl_reconstruction(grid6, r, c):
    F = np.zeros((20, 20), dtype=complex)
    F[r, c] = 1
    R = boson.weyl_reconstruct_boson(F, grid6)
    assert np.abs(R - F)[BLOCK, BLOCK].max() < 1e-2


def test_weyl_number_operator_needs_wider_grid(grid6):
    F = SP20.adag @ SP20.a
    wide = boson.weyl_reconstruct_boson(F, ComplexGrid(8.0, 161))
    assert np.abs(wide - F)[BLOCK, BLOCK].max() < 5e-2
    narrow = boson.weyl_reconstruct_boson(F, grid6)
    assert np.abs(narrow - F)[BLOCK, BLOCK].max() > 5e-2


def test_overlap_function(grid6):
    rng = np.random.default_rng(7)
    z = 0.8 * np.sqrt(rng.random(4)) * np.exp(2j * np.pi * rng.random(4))
    a, b, g, d = z
    I = boson.overlap_function_boson(a, b, g, d, grid6, 30)
    assert abs(I - boson.coherent_overlap(g, a) * boson.coherent_overlap(b, d)) < 1e-3


def test_coherent_overlap_modulus():
    rng = np.random.default_rng(8)
    for _ in range(5):
        a, b = (complex(*rng.uniform(-0.7, 0.7, 2)) for _ in range(2))
        va, vb = boson.coherent_state(a, 30), boson.coherent_state(b, 30)
        assert abs(abs(np.vdot(vb, va)) ** 2 - np.exp(-abs(a - b) ** 2)) < 1e-8
        assert abs(np.vdot(vb, va) - boson.coherent_overlap(b, a)) < 1e-8


def test_identity_resolution(grid6):
    Id = boson.identity_resolution_boson(grid6, 20)
    assert np.abs(Id - np.eye(20))[BLOCK, BLOCK].max() < 1e-2
