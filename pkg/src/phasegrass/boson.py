"""Single-mode bosonic P-function on a truncated Fock space.

Grid quadrature throughout: nodes alpha_jk = (-X + j*delta) + i(-X + k*delta)
with weight delta^2.  Displacement matrix elements used inside quadratures are
the exact projections of the infinite-dimensional operator (Laguerre form),
so the quadratures are not polluted by truncation of the generator; the
matrix exponential of the truncated generator is kept as
:func:`boson_displacement` and cross-checked against them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np
from scipy.linalg import expm

from . import _kernels

RIM_THRESHOLD = 1e-3
DEFAULT_DIM = 20
DEFAULT_HALFWIDTH = 6.0
DEFAULT_POINTS = 121


class TruncationWarning(UserWarning):
    pass


class PNotRepresentableError(ValueError):
    """The characteristic function does not decay inside the grid."""


@dataclass(frozen=True)
class TruncatedBosonSpace:
    dim: int = DEFAULT_DIM

    @cached_property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim)), 1).astype(complex)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    def number_state(self, n: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[n] = 1.0
        return v


@dataclass(frozen=True)
class ComplexGrid:
    halfwidth: float = DEFAULT_HALFWIDTH
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError("points per axis must be an odd integer >= 3")
        if self.halfwidth <= 0:
            raise ValueError("half-width must be positive")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.halfwidth, self.halfwidth, self.points)

    @property
    def delta(self) -> float:
        return 2.0 * self.halfwidth / (self.points - 1)

    @property
    def weight(self) -> float:
        return self.delta**2

    @property
    def nodes(self) -> np.ndarray:
        """nodes[j, k] = axis[j] + 1j * axis[k]."""
        x = self.axis
        return x[:, None] + 1j * x[None, :]

    @property
    def disc(self) -> np.ndarray:
        """Nodes inside the inscribed disc |z| <= halfwidth."""
        return np.abs(self.nodes) <= self.halfwidth * (1 + 1e-12)

    @property
    def rim(self) -> np.ndarray:
        """The outermost ring of disc nodes."""
        r = np.abs(self.nodes)
        return self.disc & (r > self.halfwidth - self.delta)


# -- states and operators -------------------------------------------------


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    logf = np.array([0.5 * np.log(float(factorial(k))) for k in n])
    with np.errstate(divide="ignore"):
        amp = np.exp(-abs(alpha) ** 2 / 2 - logf) * np.power(complex(alpha), n)
    return amp.astype(complex)


def thermal_state(nbar: float, dim: int) -> np.ndarray:
    """Geometric distribution truncated to ``dim`` levels and renormalized."""
    if nbar == 0:
        p = np.zeros(dim)
        p[0] = 1.0
    else:
        t = nbar / (nbar + 1.0)
        p = t ** np.arange(dim)
    return np.diag(p / p.sum()).astype(complex)


def vacuum_state(dim: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def boson_displacement(alpha: complex, space: TruncatedBosonSpace) -> np.ndarray:
    """expm(alpha a^+ - alpha^* a) on the truncated space."""
    if abs(alpha) ** 2 > space.dim / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds dim/4; truncated displacement is unreliable",
            TruncationWarning,
            stacklevel=2,
        )
    return expm(alpha * space.adag - np.conj(alpha) * space.a)


def normal_ordered_displacement(alpha: complex, space: TruncatedBosonSpace) -> np.ndarray:
    """exp(alpha a^+) exp(-alpha^* a) exp(-|alpha|^2/2); the series terminate on the truncated space."""
    return expm(alpha * space.adag) @ expm(-np.conj(alpha) * space.a) * np.exp(-abs(alpha) ** 2 / 2)


def antinormal_ordered_displacement(alpha: complex, space: TruncatedBosonSpace) -> np.ndarray:
    return expm(-np.conj(alpha) * space.a) @ expm(alpha * space.adag) * np.exp(abs(alpha) ** 2 / 2)


def displacement_elements(alpha: complex, dim: int) -> np.ndarray:
    """<m|D(alpha)|n> for m, n < dim, exact (no truncation of the generator)."""
    return _kernels.normal_matrix(complex(alpha), dim) * np.exp(-abs(alpha) ** 2 / 2)


def _displacement_chunks(xis: np.ndarray, dim: int, chunk: int = 1024):
    xis = np.ascontiguousarray(np.asarray(xis, dtype=np.complex128).ravel())
    for s in range(0, xis.size, chunk):
        part = xis[s : s + chunk]
        yield part, _kernels.normal_matrix_stack(part, dim) * np.exp(-np.abs(part) ** 2 / 2)[:, None, None]


# -- characteristic function and P ----------------------------------------


def char_normal(rho: np.ndarray, xi) -> complex | np.ndarray:
    """Tr[rho exp(xi a^+) exp(-xi^* a)], scalar or elementwise over an array."""
    arr = np.asarray(xi, dtype=np.complex128)
    vals = _kernels.char_normal_nodes(np.ascontiguousarray(rho, dtype=np.complex128), np.ascontiguousarray(arr.ravel()))
    return complex(vals[0]) if arr.ndim == 0 else vals.reshape(arr.shape)


@dataclass
class PField:
    grid: ComplexGrid
    values: np.ndarray  # complex, shape (points, points), indexed like grid.nodes
    imag_residual: float
    rim_max: float
    forced: bool = False
    chi: np.ndarray | None = field(default=None, repr=False)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def integral(self) -> complex:
        return complex(self.values.sum() * self.grid.weight)

    def to_dict(self) -> dict:
        vals = self.values.reshape(-1)
        return {
            "xi_halfwidth": self.grid.halfwidth,
            "points": self.grid.points,
            "values": [[float(v.real), float(v.imag)] for v in vals],
        }


def p_function_grid(rho: np.ndarray, grid: ComplexGrid, force: bool = False) -> PField:
    """P(alpha) = (1/pi^2) sum_xi chi(xi) exp(alpha xi^* - alpha^* xi) delta^2.

    The xi sum runs over the inscribed disc of the grid.  If |chi| on the
    disc rim exceeds RIM_THRESHOLD the state has no P-function resolvable on
    this grid and PNotRepresentableError is raised unless ``force``.
    """
    nodes = grid.nodes
    disc = grid.disc
    chi = np.zeros(nodes.shape, dtype=complex)
    chi[disc] = char_normal(rho, nodes[disc])
    rim_max = float(np.abs(chi[grid.rim]).max())
    if rim_max > RIM_THRESHOLD and not force:
        raise PNotRepresentableError(
            f"P not representable on this grid: |chi| reaches {rim_max:.3g} on the rim "
            f"(threshold {RIM_THRESHOLD:g}); the state may have a singular P-function"
        )
    # alpha xi^* - alpha^* xi = 2i (ay xx - ax xy): separable in the two axes
    x = grid.axis
    e_plus = np.exp(2j * np.outer(x, x))  # [a, xi] -> exp(+2i a xi)
    e_minus = e_plus.conj()
    # values[ax, ay] = sum_{xx, xy} e_minus[ax, xy] chi[xx, xy] e_plus[ay, xx]
    vals = e_minus @ chi.T @ e_plus.T * (grid.weight / np.pi**2)
    imag_res = float(np.abs(vals.imag).max())
    return PField(grid, vals, imag_res, rim_max, forced=force and rim_max > RIM_THRESHOLD, chi=chi)


def thermal_p_exact(alpha, nbar: float) -> np.ndarray:
    return np.exp(-np.abs(alpha) ** 2 / nbar) / (np.pi * nbar)


def moment_from_p(p: PField, n: int, m: int) -> complex:
    """sum_alpha P(alpha) alpha^*^n alpha^m delta^2."""
    a = p.grid.nodes
    return complex((p.values * np.conj(a) ** n * a**m).sum() * p.grid.weight)


def moment_direct(rho: np.ndarray, n: int, m: int) -> complex:
    """Tr(rho a^+^n a^m)."""
    space = TruncatedBosonSpace(rho.shape[0])
    op = np.linalg.matrix_power(space.adag, n) @ np.linalg.matrix_power(space.a, m)
    return complex(np.trace(rho @ op))


# -- Weyl expansion and coherent-state identities ---------------------------


def weyl_reconstruct_boson(F: np.ndarray, grid: ComplexGrid) -> np.ndarray:
    """sum_xi (delta^2/pi) Tr[F D(xi)] D(-xi) over every grid node."""
    F = np.ascontiguousarray(F, dtype=np.complex128)
    xis = np.ascontiguousarray(grid.nodes.ravel())
    return _kernels.weyl_sum(F, xis, grid.weight / np.pi)


def reliable_block(dim: int) -> slice:
    return slice(0, dim // 2)


def overlap_function_boson(alpha, beta, gamma, delta, grid: ComplexGrid, dim: int) -> complex:
    """sum_xi (delta^2/pi) <beta|D(xi)|alpha> <gamma|D(-xi)|delta>."""
    va, vb, vg, vd = (coherent_state(z, dim) for z in (alpha, beta, gamma, delta))
    total = 0j
    for _, D in _displacement_chunks(grid.nodes, dim):
        left = np.einsum("i,kij,j->k", vb.conj(), D, va)
        # D(-xi) = D(xi)^dagger
        right = np.einsum("i,kji,j->k", vg.conj(), D.conj(), vd)
        total += (left * right).sum()
    return total * grid.weight / np.pi


def coherent_overlap(beta, alpha) -> complex:
    """<beta|alpha> in closed form."""
    return complex(np.exp(-abs(alpha) ** 2 / 2 - abs(beta) ** 2 / 2 + np.conj(beta) * alpha))


def identity_resolution_boson(grid: ComplexGrid, dim: int) -> np.ndarray:
    """sum_alpha (delta^2/pi) |alpha><alpha| on the truncated space."""
    acc = np.zeros((dim, dim), dtype=complex)
    for z in grid.nodes.ravel():
        v = coherent_state(z, dim)
        acc += np.outer(v, v.conj())
    return acc * grid.weight / np.pi
