"""Fermionic quasiprobability functions phi and P, and their moments."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from . import fock
from .grassmann import GeneratorRegistry, GrassmannPoly, RegistryError
from .kernel import (
    GradedKernel,
    coherent_bra,
    coherent_ket,
    f_factor,
    kernel_exp,
    kernel_multiply,
    cdag_times,
    star_times_c,
    multiply_all,
    projector,
    w_factor,
)

FLAVORS = ("p", "phi")


@dataclass(frozen=True)
class PRepresentation:
    flavor: str
    modes: int
    poly: GrassmannPoly

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if self.poly.registry != g_registry(self.modes):
            raise RegistryError("representation must live on the g-family registry")

    def to_dict(self) -> dict:
        return {"flavor": self.flavor, "modes": self.modes, **self.poly.to_dict()}

    @classmethod
    def from_dict(cls, data) -> "PRepresentation":
        poly = GrassmannPoly.from_dict(data)
        return cls(data["flavor"], int(data["modes"]), poly.with_registry(g_registry(int(data["modes"]))))

    def __str__(self):
        name = "P" if self.flavor == "p" else "phi"
        return f"{name}(g, g*) = {self.poly}"


@lru_cache(maxsize=None)
def g_registry(n: int) -> GeneratorRegistry:
    return GeneratorRegistry.standard(n, ("g",))


@lru_cache(maxsize=None)
def _work_registry(n: int) -> GeneratorRegistry:
    return GeneratorRegistry.standard(n, ("g", "h", "k"))


def _gen(reg, i):
    return GrassmannPoly.generator(reg, i)


def _dot(reg, left_pairs, right_pairs, left_star: bool, right_star: bool) -> GrassmannPoly:
    """sum_i a_i b_i for the chosen members of two pair families."""
    total = GrassmannPoly.zero(reg)
    for (a, a_s), (b, b_s) in zip(left_pairs, right_pairs):
        total = total + _gen(reg, a_s if left_star else a) * _gen(reg, b_s if right_star else b)
    return total


@lru_cache(maxsize=None)
def _ordered_displacement(n: int) -> GradedKernel:
    """exp(c^dagger . h) exp(-h^* . c) over the working registry."""
    reg = _work_registry(n)
    hp = reg.pairs("h")
    return kernel_multiply(kernel_exp(cdag_times(n, reg, hp)), kernel_exp(-star_times_c(n, reg, hp)))


def _characteristic(rho: np.ndarray) -> GrassmannPoly:
    """<k| rho exp(c^dagger . h) exp(-h^* . c) |k> as a Grassmann number."""
    n = fock.modes_of(rho)
    reg = _work_registry(n)
    kp = reg.pairs("k")
    left = kernel_multiply(coherent_bra(n, reg, kp), GradedKernel.embed(rho, reg))
    right = kernel_multiply(_ordered_displacement(n), coherent_ket(n, reg, kp))
    return kernel_multiply(left, right).vacuum_element()


def _finish(n: int, integrand: GrassmannPoly) -> GrassmannPoly:
    reg = _work_registry(n)
    out = integrand.integrate_d2(reg.pairs("k")).integrate_d2(reg.pairs("h"))
    return out.with_registry(g_registry(n))


def compute_phi(rho: np.ndarray) -> PRepresentation:
    """phi(g) = int d^2h d^2k <k|rho e^{c^+.h} e^{-h^*.c}|k> e^{h^*.g} e^{-g^*.h}."""
    n = fock.modes_of(rho)
    reg = _work_registry(n)
    gp, hp = reg.pairs("g"), reg.pairs("h")
    chi = _characteristic(rho)
    integrand = chi * _dot(reg, hp, gp, True, False).exp() * (-_dot(reg, gp, hp, True, False)).exp()
    return PRepresentation("phi", n, _finish(n, integrand))


def compute_p(rho: np.ndarray) -> PRepresentation:
    """P(g) = int d^2h d^2k <k|rho e^{c^+.h} e^{-h^*.c}|k> e^{h^*.g} e^{g^*.h} f(g)."""
    n = fock.modes_of(rho)
    reg = _work_registry(n)
    gp, hp = reg.pairs("g"), reg.pairs("h")
    chi = _characteristic(rho)
    integrand = (
        chi
        * _dot(reg, hp, gp, True, False).exp()
        * _dot(reg, gp, hp, True, False).exp()
        * f_factor(reg, gp)
    )
    return PRepresentation("p", n, _finish(n, integrand))


def reconstruct(rep: PRepresentation) -> np.ndarray:
    """rho = int d^2g phi |g><g|  or  int d^2g P |g><-g|."""
    n = rep.modes
    reg = g_registry(n)
    pairs = reg.pairs("g")
    proj = projector(n, reg, pairs, negated_bra=(rep.flavor == "p"))
    return kernel_multiply(GradedKernel.scalar(rep.poly, n), proj).integrate_d2(pairs).to_matrix()


def convert(rep: PRepresentation) -> PRepresentation:
    """P(g, g^*) = f(g, g^*) phi(g, -g^*) and back."""
    reg = g_registry(rep.modes)
    pairs = reg.pairs("g")
    flipped = rep.poly.negate([gs for _, gs in pairs])
    other = "phi" if rep.flavor == "p" else "p"
    return PRepresentation(other, rep.modes, f_factor(reg, pairs) * flipped)


def weight(n: int) -> GrassmannPoly:
    reg = g_registry(n)
    return w_factor(reg, reg.pairs("g"))


def f_function(n: int) -> GrassmannPoly:
    reg = g_registry(n)
    return f_factor(reg, reg.pairs("g"))


@dataclass(frozen=True)
class Normalization:
    flavor: str
    unweighted: complex
    weighted: complex | None = None

    @property
    def value(self) -> complex:
        """The quasiprobability normalization (1 for every valid state)."""
        return self.unweighted if self.weighted is None else self.weighted


def normalization(rep: PRepresentation) -> Normalization:
    pairs = g_registry(rep.modes).pairs("g")
    plain = rep.poly.integrate_d2(pairs).constant()
    if rep.flavor == "p":
        return Normalization("p", plain)
    weighted = (weight(rep.modes) * rep.poly).integrate_d2(pairs).constant()
    return Normalization("phi", plain, weighted)


# ---------------------------------------------------------------------------
# Normally ordered correlation functions
# ---------------------------------------------------------------------------


_TOKEN = re.compile(r"^c(\d+)(\+?)$")


@dataclass(frozen=True)
class CorrelationQuery:
    """<c^+_{l1} ... c^+_{lp} c_{mq} ... c_{m1}>.

    ``creations`` holds l1..lp and ``annihilations`` holds mq..m1, both in
    the left-to-right order they appear in the operator product.
    """

    creations: tuple[int, ...] = ()
    annihilations: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "CorrelationQuery":
        cre, ann = [], []
        for tok in text.split():
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"bad token {tok!r}; expected cN+ or cN")
            mode = int(m.group(1))
            if m.group(2):
                if ann:
                    raise ValueError("creation operators must precede annihilation operators (normal order)")
                cre.append(mode)
            else:
                ann.append(mode)
        return cls(tuple(cre), tuple(ann))

    def check(self, n: int):
        for i in self.creations + self.annihilations:
            if not 1 <= i <= n:
                raise IndexError(f"mode {i} out of range 1..{n}")

    def __str__(self):
        toks = [f"c{i}+" for i in self.creations] + [f"c{i}" for i in self.annihilations]
        return " ".join(toks) if toks else "I"


def _product(reg, idx) -> GrassmannPoly:
    return reduce(lambda a, b: a * b, (_gen(reg, i) for i in idx), GrassmannPoly.scalar(reg, 1.0))


def correlation_via_p(rep: PRepresentation, query: CorrelationQuery) -> complex:
    """int d^2g P (g^*_{l1} ... g^*_{lp}) (g_{mq} ... g_{m1})."""
    if rep.flavor != "p":
        raise ValueError("correlation_via_p needs a P-flavor representation")
    query.check(rep.modes)
    reg = g_registry(rep.modes)
    stars = _product(reg, [reg.pair(i)[1] for i in query.creations])
    plain = _product(reg, [reg.pair(i)[0] for i in query.annihilations])
    return (rep.poly * stars * plain).integrate_d2(reg.pairs("g")).constant()


def correlation_via_phi(rep: PRepresentation, query: CorrelationQuery) -> complex:
    """int d^2g w phi (g_{mq} ... g_{m1}) (g^*_{l1} ... g^*_{lp})."""
    if rep.flavor != "phi":
        raise ValueError("correlation_via_phi needs a phi-flavor representation")
    query.check(rep.modes)
    reg = g_registry(rep.modes)
    stars = _product(reg, [reg.pair(i)[1] for i in query.creations])
    plain = _product(reg, [reg.pair(i)[0] for i in query.annihilations])
    return (weight(rep.modes) * rep.poly * plain * stars).integrate_d2(reg.pairs("g")).constant()


def correlation_direct(rho: np.ndarray, query: CorrelationQuery) -> complex:
    """Tr(rho c^+_{l1} ... c^+_{lp} c_{mq} ... c_{m1}) by dense linear algebra."""
    n = fock.modes_of(rho)
    query.check(n)
    op = np.eye(1 << n, dtype=complex)
    for i in query.creations:
        op = op @ fock.creation(i, n)
    for i in query.annihilations:
        op = op @ fock.annihilation(i, n)
    return complex(np.trace(rho @ op))


def all_queries(n: int, max_creations: int = 2, max_annihilations: int = 2) -> list[CorrelationQuery]:
    """Every ordered query with up to the given numbers of operators."""
    from itertools import product

    out = []
    for p in range(max_creations + 1):
        for q in range(max_annihilations + 1):
            for cre in product(range(1, n + 1), repeat=p):
                for ann in product(range(1, n + 1), repeat=q):
                    out.append(CorrelationQuery(tuple(cre), tuple(ann)))
    return out


def single_mode_state(p: float) -> np.ndarray:
    return np.diag([1.0 - p, p]).astype(complex)


def pair_state(a: float = 0.6, b: float = 0.8) -> np.ndarray:
    psi = a * fock.ket("00") + b * fock.ket("11")
    return np.outer(psi, psi.conj())
