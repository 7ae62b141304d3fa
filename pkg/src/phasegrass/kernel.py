"""Grassmann-valued operators on the fermionic Fock space.

A :class:`GradedKernel` stores ``sum_{r,c} E[r,c] |r><c|`` with every
Grassmann coefficient E[r,c] written to the LEFT of the operator part.  The
vacuum is Grassmann-even and each occupied mode contributes odd parity, so
moving a monomial of degree d rightward past ``|r><s|`` costs
``(-1)^(d * (parity(r) + parity(s)))``.  Kets and bras are kernels padded
with the vacuum: ``|psi>`` is stored as ``|psi><0|`` and ``<psi|`` as
``|0><psi|``.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from . import fock
from .grassmann import GeneratorRegistry, GrassmannPoly, RegistryError


def _odd_sign(parity_r: int, parity_s: int) -> bool:
    """True when odd Grassmann content flips sign passing |r><s|."""
    return bool((parity_r + parity_s) & 1)


class GradedKernel:
    __slots__ = ("modes", "registry", "entries")

    def __init__(self, modes: int, registry: GeneratorRegistry, entries: Mapping[tuple[int, int], GrassmannPoly] = ()):
        self.modes = int(modes)
        self.registry = registry
        clean = {}
        for (r, c), p in dict(entries).items():
            if p.registry != registry:
                raise RegistryError("kernel entry over a different registry")
            if not p.is_zero():
                clean[(int(r), int(c))] = p
        self.entries = clean

    @property
    def dim(self) -> int:
        return 1 << self.modes

    @property
    def parities(self) -> np.ndarray:
        return fock._parities(self.modes)

    # -- construction ------------------------------------------------------
    @classmethod
    def embed(cls, m: np.ndarray, registry: GeneratorRegistry) -> "GradedKernel":
        """Lift a plain Fock matrix (no Grassmann content)."""
        n = fock.modes_of(m)
        ents = {
            (int(r), int(c)): GrassmannPoly.scalar(registry, m[r, c])
            for r, c in zip(*np.nonzero(np.abs(m) > 0))
        }
        return cls(n, registry, ents)

    @classmethod
    def scalar(cls, p: GrassmannPoly, modes: int) -> "GradedKernel":
        """The Grassmann number p times the identity operator."""
        return cls(modes, p.registry, {(r, r): p for r in range(1 << modes)})

    @classmethod
    def identity(cls, modes: int, registry: GeneratorRegistry) -> "GradedKernel":
        return cls.scalar(GrassmannPoly.scalar(registry, 1.0), modes)

    @classmethod
    def zero(cls, modes: int, registry: GeneratorRegistry) -> "GradedKernel":
        return cls(modes, registry)

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "GradedKernel"):
        if other.modes != self.modes:
            raise ValueError("kernels over different Fock spaces")
        if other.registry != self.registry:
            raise RegistryError("kernels over different registries")

    def __add__(self, other: "GradedKernel") -> "GradedKernel":
        self._check(other)
        ents = dict(self.entries)
        for key, p in other.entries.items():
            ents[key] = ents[key] + p if key in ents else p
        return GradedKernel(self.modes, self.registry, ents)

    def __neg__(self):
        return GradedKernel(self.modes, self.registry, {k: -p for k, p in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other: "GradedKernel") -> "GradedKernel":
        return kernel_multiply(self, other)

    def scale(self, c: complex) -> "GradedKernel":
        return GradedKernel(self.modes, self.registry, {k: p * c for k, p in self.entries.items()})

    def map_entries(self, fn) -> "GradedKernel":
        return GradedKernel(self.modes, self.registry, {k: fn(p) for k, p in self.entries.items()})

    def negate(self, gens: Iterable[int]) -> "GradedKernel":
        gens = list(gens)
        return self.map_entries(lambda p: p.negate(gens))

    def integrate_d2(self, pairs) -> "GradedKernel":
        """Apply an even Berezin measure from the left; it passes every operator freely."""
        pairs = list(pairs)
        return self.map_entries(lambda p: p.integrate_d2(pairs))

    def adjoint(self) -> "GradedKernel":
        """(E |r><c|)^dagger = |c><r| E^* = (-1)^(d(p_r + p_c)) E^* |c><r|."""
        par = self.parities
        ents = {}
        for (r, c), p in self.entries.items():
            q = p.conjugate()
            if _odd_sign(par[r], par[c]):
                q = q.grade_involution()
            ents[(c, r)] = q
        return GradedKernel(self.modes, self.registry, ents)

    def entry(self, r: int, c: int) -> GrassmannPoly:
        return self.entries.get((r, c), GrassmannPoly.zero(self.registry))

    def vacuum_element(self) -> GrassmannPoly:
        return self.entry(0, 0)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; every entry must be a plain number."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for (r, c), p in self.entries.items():
            if not p.is_scalar():
                raise ValueError(f"entry ({r}, {c}) still carries Grassmann content: {p}")
            m[r, c] = p.constant()
        return m

    def max_abs_diff(self, other: "GradedKernel") -> float:
        d = self - other
        return max((p.max_abs_diff(GrassmannPoly.zero(self.registry)) for p in d.entries.values()), default=0.0)

    def __repr__(self):
        body = ", ".join(f"[{r},{c}]: {p}" for (r, c), p in sorted(self.entries.items()))
        return f"GradedKernel(modes={self.modes}, {{{body}}})"


def kernel_multiply(a: GradedKernel, b: GradedKernel) -> GradedKernel:
    a._check(b)
    par = a.parities
    by_row: dict[int, list[tuple[int, GrassmannPoly]]] = {}
    for (s, c), p in b.entries.items():
        by_row.setdefault(s, []).append((c, p))
    flipped: dict[tuple[int, int], GrassmannPoly] = {}
    acc: dict[tuple[int, int], list[GrassmannPoly]] = {}
    for (r, s), pa in a.entries.items():
        for c, pb in by_row.get(s, ()):
            if _odd_sign(par[r], par[s]):
                key = (s, c)
                if key not in flipped:
                    flipped[key] = pb.grade_involution()
                pb = flipped[key]
            acc.setdefault((r, c), []).append(pa * pb)
    ents = {}
    for key, terms in acc.items():
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        ents[key] = total
    return GradedKernel(a.modes, a.registry, ents)


def kernel_exp(x: GradedKernel, max_order: int = 256) -> GradedKernel:
    """exp(x) for a kernel whose powers terminate (nilpotent Grassmann content)."""
    total = GradedKernel.identity(x.modes, x.registry)
    term = total
    for k in range(1, max_order + 1):
        term = kernel_multiply(term, x).scale(1.0 / k)
        if not term.entries:
            return total
        total = total + term
    raise ValueError("kernel exponential series did not terminate")


def multiply_all(*ks: GradedKernel) -> GradedKernel:
    out = ks[0]
    for k in ks[1:]:
        out = kernel_multiply(out, k)
    return out


# ---------------------------------------------------------------------------
# Mode operators with Grassmann coefficients
# ---------------------------------------------------------------------------


def _gen(reg: GeneratorRegistry, i: int) -> GrassmannPoly:
    return GrassmannPoly.generator(reg, i)


def _pairs(registry: GeneratorRegistry, modes: int, family: str, pairs):
    if pairs is None:
        pairs = registry.pairs(family, range(1, modes + 1))
    pairs = list(pairs)
    if len(pairs) != modes:
        raise RegistryError(f"need one generator pair per mode ({modes}), got {len(pairs)}")
    return pairs


def cdag_times(modes: int, registry: GeneratorRegistry, pairs) -> GradedKernel:
    """sum_i c_i^dagger x_i (operator left of the Grassmann variable)."""
    out = GradedKernel.zero(modes, registry)
    for i, (x, _) in enumerate(pairs, start=1):
        out = out + kernel_multiply(
            GradedKernel.embed(fock.creation(i, modes), registry),
            GradedKernel.scalar(_gen(registry, x), modes),
        )
    return out


def star_times_c(modes: int, registry: GeneratorRegistry, pairs) -> GradedKernel:
    """sum_i x_i^* c_i (Grassmann variable left of the operator)."""
    out = GradedKernel.zero(modes, registry)
    for i, (_, xs) in enumerate(pairs, start=1):
        out = out + kernel_multiply(
            GradedKernel.scalar(_gen(registry, xs), modes),
            GradedKernel.embed(fock.annihilation(i, modes), registry),
        )
    return out


def displacement(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """D(x) = exp(c^dagger . x - x^* . c) by its terminating power series."""
    pairs = _pairs(registry, modes, family, pairs)
    return kernel_exp(cdag_times(modes, registry, pairs) - star_times_c(modes, registry, pairs))


def normal_ordered_displacement(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """exp(c^dagger . x) exp(-x^* . c) exp(-x^* . x / 2)."""
    pairs = _pairs(registry, modes, family, pairs)
    left = kernel_exp(cdag_times(modes, registry, pairs))
    right = kernel_exp(-star_times_c(modes, registry, pairs))
    gauss = (sum_pair_products(registry, pairs, star_first=True) * -0.5).exp()
    return multiply_all(left, right, GradedKernel.scalar(gauss, modes))


def antinormal_ordered_displacement(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """exp(-x^* . c) exp(c^dagger . x) exp(+x^* . x / 2)."""
    pairs = _pairs(registry, modes, family, pairs)
    left = kernel_exp(-star_times_c(modes, registry, pairs))
    right = kernel_exp(cdag_times(modes, registry, pairs))
    gauss = (sum_pair_products(registry, pairs, star_first=True) * 0.5).exp()
    return multiply_all(left, right, GradedKernel.scalar(gauss, modes))


def sum_pair_products(registry: GeneratorRegistry, pairs, star_first: bool) -> GrassmannPoly:
    """sum_i x_i^* x_i (star_first) or sum_i x_i x_i^*."""
    total = GrassmannPoly.zero(registry)
    for x, xs in pairs:
        a, b = (xs, x) if star_first else (x, xs)
        total = total + _gen(registry, a) * _gen(registry, b)
    return total


def vacuum(modes: int, registry: GeneratorRegistry) -> GradedKernel:
    """|0><0| -- the padded vacuum ket (and bra)."""
    return GradedKernel(modes, registry, {(0, 0): GrassmannPoly.scalar(registry, 1.0)})


def coherent_ket(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """|x> = D(x)|0>, stored as |x><0|."""
    return kernel_multiply(displacement(modes, registry, pairs, family), vacuum(modes, registry))


def coherent_bra(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """<x| as the graded adjoint of |x>, stored as |0><x|."""
    return coherent_ket(modes, registry, pairs, family).adjoint()


def _pair_gens(pairs):
    return [i for pr in pairs for i in pr]


def coherent_bra_negated(modes: int, registry: GeneratorRegistry, pairs=None, family: str = "g") -> GradedKernel:
    """<-x| : the bra with x -> -x and x^* -> -x^*."""
    pairs = _pairs(registry, modes, family, pairs)
    return coherent_bra(modes, registry, pairs).negate(_pair_gens(pairs))


def inner(bra: GradedKernel, ket: GradedKernel) -> GrassmannPoly:
    """<bra|ket> as a Grassmann number."""
    return kernel_multiply(bra, ket).vacuum_element()


def matrix_element(bra: GradedKernel, op: GradedKernel, ket: GradedKernel) -> GrassmannPoly:
    return multiply_all(bra, op, ket).vacuum_element()


# ---------------------------------------------------------------------------
# Identity resolutions, trace, reconstruction
# ---------------------------------------------------------------------------


def f_factor(registry: GeneratorRegistry, pairs) -> GrassmannPoly:
    """prod_i (2 x_i x_i^* - 1)."""
    out = GrassmannPoly.scalar(registry, 1.0)
    for x, xs in pairs:
        out = out * (2 * _gen(registry, x) * _gen(registry, xs) - 1.0)
    return out


def w_factor(registry: GeneratorRegistry, pairs) -> GrassmannPoly:
    """prod_i (2 x_i x_i^* + 1)."""
    out = GrassmannPoly.scalar(registry, 1.0)
    for x, xs in pairs:
        out = out * (2 * _gen(registry, x) * _gen(registry, xs) + 1.0)
    return out


def projector(modes: int, registry: GeneratorRegistry, pairs=None, negated_bra: bool = False) -> GradedKernel:
    """|g><g| or |g><-g|."""
    pairs = _pairs(registry, modes, "g", pairs)
    bra = coherent_bra_negated(modes, registry, pairs) if negated_bra else coherent_bra(modes, registry, pairs)
    return kernel_multiply(coherent_ket(modes, registry, pairs), bra)


def identity_resolution_standard(n: int) -> np.ndarray:
    """int d^2g |g><g| evaluated exactly."""
    reg = GeneratorRegistry.standard(n, ("g",))
    pairs = reg.pairs("g")
    return projector(n, reg, pairs).integrate_d2(pairs).to_matrix()


def identity_resolution_alternate(n: int, with_f: bool = True) -> np.ndarray:
    """int d^2g f(g, g^*) |g><-g| evaluated exactly (without f when asked)."""
    reg = GeneratorRegistry.standard(n, ("g",))
    pairs = reg.pairs("g")
    k = projector(n, reg, pairs, negated_bra=True)
    if with_f:
        k = kernel_multiply(GradedKernel.scalar(f_factor(reg, pairs), n), k)
    return k.integrate_d2(pairs).to_matrix()


def graded_trace(k: GradedKernel) -> GrassmannPoly:
    """Tr(sum E|r><r|) = sum_r (-1)^(d parity(r)) E[r, r]."""
    par = k.parities
    total = GrassmannPoly.zero(k.registry)
    for (r, c), p in k.entries.items():
        if r == c:
            total = total + (p.grade_involution() if par[r] else p)
    return total


def weyl_reconstruct_fermion(F: np.ndarray) -> np.ndarray:
    """int d^2h int d^2k <k| F D(h) |k> D(-h), evaluated exactly."""
    n = fock.modes_of(F)
    reg = GeneratorRegistry.standard(n, ("h", "k"))
    hp, kp = reg.pairs("h"), reg.pairs("k")
    D_h = displacement(n, reg, hp)
    # <k| F D(h) |k>: contract the cheap side first
    right = kernel_multiply(D_h, coherent_ket(n, reg, kp))
    left = kernel_multiply(coherent_bra(n, reg, kp), GradedKernel.embed(F, reg))
    s = kernel_multiply(left, right).vacuum_element()
    # d^2k is an even measure and D(-h) is k-free, so integrate k out first
    s = s.integrate_d2(kp)
    D_mh = D_h.negate(_pair_gens(hp))
    out = kernel_multiply(GradedKernel.scalar(s, n), D_mh).integrate_d2(hp)
    return out.to_matrix()


def overlap_function(g1, g2, g3, g4, registry: GeneratorRegistry, h_pair) -> GrassmannPoly:
    """int d^2h <g2| D(h) |g1> <g3| D(-h) |g4> for single-mode coherent states.

    ``g1..g4`` and ``h_pair`` are (x, x^*) generator pairs.
    """
    D_h = displacement(1, registry, [h_pair])
    D_mh = D_h.negate(h_pair)
    a = matrix_element(coherent_bra(1, registry, [g2]), D_h, coherent_ket(1, registry, [g1]))
    b = matrix_element(coherent_bra(1, registry, [g3]), D_mh, coherent_ket(1, registry, [g4]))
    return (a * b).integrate_d2([h_pair])
