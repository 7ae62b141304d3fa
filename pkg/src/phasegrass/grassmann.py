"""Sparse exterior algebra over an ordered registry of anticommuting generators.

Monomials are int64 bitmasks over registry indices; the canonical order of
a monomial is ascending registry index.  Coefficients are complex doubles,
and terms with magnitude below :data:`DEDUP_THRESHOLD` are dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels

DEDUP_THRESHOLD = 1e-12

SPECIES = ("g", "g*", "h", "h*", "k", "k*")
_PARTNER = {"g": "g*", "g*": "g", "h": "h*", "h*": "h", "k": "k*", "k*": "k"}
_LABEL_RE = re.compile(r"^([ghk])(\d+)(\*?)$")


class RegistryError(ValueError):
    """Index outside a registry, or operands over different registries."""


class PairingError(ValueError):
    """A generator has no conjugate partner in its registry."""


class NilpotencyError(ValueError):
    """exp_nilpotent was given a polynomial with a nonzero constant term."""


def parse_label(text: str) -> tuple[int, str]:
    m = _LABEL_RE.match(text.strip())
    if not m:
        raise RegistryError(f"bad generator label {text!r}")
    return int(m.group(2)), m.group(1) + m.group(3)


def format_label(label: tuple[int, str]) -> str:
    mode, species = label
    return f"{species[0]}{mode}{species[1:]}"


@dataclass(frozen=True)
class GeneratorRegistry:
    """Ordered, immutable list of (mode, species) generator labels."""

    labels: tuple[tuple[int, str], ...]

    def __post_init__(self):
        labels = tuple((int(m), str(s)) for m, s in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise RegistryError("generator labels must be unique")
        for _, s in labels:
            if s not in SPECIES:
                raise RegistryError(f"unknown species {s!r}")
        if len(labels) > 62:
            raise RegistryError("at most 62 generators are supported")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def standard(cls, modes: int, families: Sequence[str] = ("g",)) -> "GeneratorRegistry":
        """Families in the given order; within a family g1, g1*, g2, g2*, ..."""
        labels = []
        for fam in families:
            for i in range(1, modes + 1):
                labels.append((i, fam))
                labels.append((i, fam + "*"))
        return cls(tuple(labels))

    @classmethod
    def from_strings(cls, names: Iterable[str]) -> "GeneratorRegistry":
        return cls(tuple(parse_label(n) for n in names))

    def extend(self, labels: Iterable[tuple[int, str]]) -> "GeneratorRegistry":
        return GeneratorRegistry(self.labels + tuple(labels))

    @property
    def count(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, mode: int, species: str) -> int:
        try:
            return self._index[(mode, species)]
        except KeyError:
            raise RegistryError(f"generator {format_label((mode, species))} not in registry") from None

    def pair(self, mode: int, family: str = "g") -> tuple[int, int]:
        return self.index(mode, family), self.index(mode, family + "*")

    def pairs(self, family: str = "g", modes: Iterable[int] | None = None) -> list[tuple[int, int]]:
        if modes is None:
            modes = sorted({m for m, s in self.labels if s == family})
        return [self.pair(m, family) for m in modes]

    def partner(self, i: int) -> int:
        self.check(i)
        mode, s = self.labels[i]
        key = (mode, _PARTNER[s])
        if key not in self._index:
            raise PairingError(f"{format_label(self.labels[i])} has no conjugate partner")
        return self._index[key]

    def check(self, i: int) -> int:
        if not 0 <= int(i) < len(self.labels):
            raise RegistryError(f"generator index {i} outside registry of size {len(self.labels)}")
        return int(i)

    def is_prefix_of(self, other: "GeneratorRegistry") -> bool:
        return other.labels[: len(self.labels)] == self.labels

    def names(self) -> list[str]:
        return [format_label(l) for l in self.labels]


def canonicalize(registry: GeneratorRegistry, seq: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort a product of generators into registry order.

    Returns ``(sign, monomial)``; sign is 0 with the empty monomial when a
    generator repeats.
    """
    seq = [registry.check(i) for i in seq]
    if len(set(seq)) != len(seq):
        return 0, ()
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


def _mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _accumulate(masks: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if masks.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.complex128)
    uniq, inv = np.unique(masks, return_inverse=True)
    re = np.bincount(inv, weights=coeffs.real, minlength=uniq.size)
    im = np.bincount(inv, weights=coeffs.imag, minlength=uniq.size)
    c = re + 1j * im
    keep = np.abs(c) >= DEDUP_THRESHOLD
    return uniq[keep].astype(np.int64), c[keep]


class GrassmannPoly:
    """Immutable element of the exterior algebra over a registry."""

    __slots__ = ("registry", "masks", "coeffs")
    __hash__ = None

    def __init__(self, registry: GeneratorRegistry, masks=(), coeffs=(), *, _canonical=False):
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if not _canonical:
            if masks.size and (masks.min() < 0 or int(masks.max()) >> registry.count):
                raise RegistryError("monomial uses generators outside the registry")
            masks, coeffs = _accumulate(masks, coeffs)
        masks.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "registry", registry)
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, key, value):
        raise AttributeError("GrassmannPoly is immutable")

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, registry):
        return cls(registry, _canonical=True)

    @classmethod
    def scalar(cls, registry, c):
        return cls(registry, [0], [c])

    @classmethod
    def generator(cls, registry, i, coeff=1.0):
        registry.check(i)
        return cls(registry, [1 << i], [coeff])

    @classmethod
    def from_terms(cls, registry, terms: Mapping[Sequence[int], complex]):
        """Build from ``{(i, j, ...): coeff}``; index tuples need not be sorted."""
        masks, coeffs = [], []
        for seq, c in terms.items():
            sign, mono = canonicalize(registry, seq)
            if sign:
                masks.append(_mask_of(mono))
                coeffs.append(sign * complex(c))
        return cls(registry, masks, coeffs)

    # -- views -------------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return {_indices_of(int(m)): complex(c) for m, c in zip(self.masks, self.coeffs)}

    def __len__(self):
        return int(self.masks.size)

    def is_zero(self) -> bool:
        return self.masks.size == 0

    def degrees(self) -> np.ndarray:
        return np.bitwise_count(self.masks).astype(np.int64)

    def constant(self) -> complex:
        hit = np.nonzero(self.masks == 0)[0]
        return complex(self.coeffs[hit[0]]) if hit.size else 0j

    def is_scalar(self) -> bool:
        return bool(np.all(self.masks == 0))

    def support(self) -> int:
        """Bitmask of every generator that appears."""
        return int(np.bitwise_or.reduce(self.masks)) if self.masks.size else 0

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GrassmannPoly):
            if other.registry != self.registry:
                raise RegistryError("operands belong to different registries")
            return other
        if np.isscalar(other):
            return GrassmannPoly.scalar(self.registry, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrassmannPoly(
            self.registry,
            np.concatenate([self.masks, other.masks]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return GrassmannPoly(self.registry, self.masks, -self.coeffs, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GrassmannPoly):
            return multiply(self, other)
        if np.isscalar(other):
            return GrassmannPoly(self.registry, self.masks, self.coeffs * complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return GrassmannPoly(self.registry, self.masks, self.coeffs * complex(other))
        return NotImplemented

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def max_abs_diff(self, other) -> float:
        d = self - other
        return float(np.abs(d.coeffs).max()) if len(d) else 0.0

    def allclose(self, other, atol=1e-10) -> bool:
        return self.max_abs_diff(other) <= atol

    def __eq__(self, other):
        if isinstance(other, GrassmannPoly) and other.registry != self.registry:
            return False
        try:
            return self.allclose(other, atol=DEDUP_THRESHOLD)
        except TypeError:
            return NotImplemented

    # -- algebra operations as methods --------------------------------------
    def conjugate(self):
        return conjugate(self)

    def integrate(self, gen):
        return berezin_integrate(self, gen)

    def integrate_d2(self, pairs):
        return integrate_d2(self, pairs)

    def negate(self, gens):
        return substitute_negate(self, gens)

    def parity_split(self):
        return parity_split(self)

    def grade_involution(self):
        """Flip the sign of every odd-degree term."""
        sign = 1.0 - 2.0 * (self.degrees() & 1)
        return GrassmannPoly(self.registry, self.masks, self.coeffs * sign, _canonical=True)

    def exp(self):
        return exp_nilpotent(self)

    def with_registry(self, registry: GeneratorRegistry) -> "GrassmannPoly":
        """Re-home onto a registry that shares this one's prefix (or is a prefix of it)."""
        if self.registry.is_prefix_of(registry):
            return GrassmannPoly(registry, self.masks, self.coeffs, _canonical=True)
        if registry.is_prefix_of(self.registry):
            if self.support() >> registry.count:
                raise RegistryError("polynomial uses generators outside the target registry")
            return GrassmannPoly(registry, self.masks, self.coeffs, _canonical=True)
        raise RegistryError("registries are not prefix-compatible")

    # -- display -----------------------------------------------------------
    def __str__(self):
        if self.is_zero():
            return "0"
        names = self.registry.names()
        out = ""
        for mono, c in self.terms.items():
            if abs(c.imag) < DEDUP_THRESHOLD:
                neg = c.real < 0
                cs = f"{abs(c.real):.12g}"
            else:
                neg = False
                cs = f"({c.real:.12g}{c.imag:+.12g}j)"
            if mono:
                body = " ".join(names[i] for i in mono)
                cs = body if cs == "1" else f"{cs}*{body}"
            if not out:
                out = f"-{cs}" if neg else cs
            else:
                out += f" - {cs}" if neg else f" + {cs}"
        return out

    def __repr__(self):
        return f"GrassmannPoly({self})"

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "generators": self.registry.names(),
            "terms": [
                {"monomial": list(mono), "re": c.real, "im": c.imag}
                for mono, c in self.terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GrassmannPoly":
        reg = GeneratorRegistry.from_strings(data["generators"])
        masks, coeffs = [], []
        for t in data["terms"]:
            sign, mono = canonicalize(reg, t["monomial"])
            if sign:
                masks.append(_mask_of(mono))
                coeffs.append(sign * complex(t.get("re", 0.0), t.get("im", 0.0)))
        return cls(reg, masks, coeffs)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "GrassmannPoly":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def multiply(p: GrassmannPoly, q: GrassmannPoly) -> GrassmannPoly:
    if p.registry != q.registry:
        raise RegistryError("operands belong to different registries")
    if p.is_zero() or q.is_zero():
        return GrassmannPoly.zero(p.registry)
    m, c = _kernels.poly_product(p.masks, p.coeffs, q.masks, q.coeffs)
    return GrassmannPoly(p.registry, m, c)


def conjugate(p: GrassmannPoly) -> GrassmannPoly:
    """(c a1 a2 ... ad)^* = c^* ad^* ... a1^*, re-sorted into canonical order."""
    reg = p.registry
    masks, coeffs = [], []
    for mono, c in p.terms.items():
        seq = [reg.partner(i) for i in reversed(mono)]
        sign, canon = canonicalize(reg, seq)
        masks.append(_mask_of(canon))
        coeffs.append(sign * c.conjugate())
    return GrassmannPoly(reg, masks, coeffs)


def berezin_integrate(p: GrassmannPoly, gen: int) -> GrassmannPoly:
    """Left Berezin integral: int dg g X = X, int dg X = 0 for X free of g."""
    gen = p.registry.check(gen)
    bit = np.int64(1) << np.int64(gen)
    hit = (p.masks & bit) != 0
    masks = p.masks[hit]
    below = np.bitwise_count(masks & (bit - 1)).astype(np.int64)
    sign = 1.0 - 2.0 * (below & 1)
    return GrassmannPoly(p.registry, masks ^ bit, p.coeffs[hit] * sign, _canonical=True)


def integrate_d2(p: GrassmannPoly, pairs: Iterable[tuple[int, int]]) -> GrassmannPoly:
    """int dg*_1 dg_1 dg*_2 dg_2 ... p, innermost differential first.

    Pairs are even so their relative order does not affect the result; they
    are applied in the order given.
    """
    out = p
    for g, gs in pairs:
        out = berezin_integrate(berezin_integrate(out, g), gs)
    return out


def substitute_negate(p: GrassmannPoly, gens: Iterable[int]) -> GrassmannPoly:
    sel = _mask_of(p.registry.check(i) for i in gens)
    if not sel:
        return p
    cnt = np.bitwise_count(p.masks & np.int64(sel)).astype(np.int64)
    sign = 1.0 - 2.0 * (cnt & 1)
    return GrassmannPoly(p.registry, p.masks, p.coeffs * sign, _canonical=True)


def parity_split(p: GrassmannPoly) -> tuple[GrassmannPoly, GrassmannPoly]:
    odd = (p.degrees() & 1).astype(bool)
    even_p = GrassmannPoly(p.registry, p.masks[~odd], p.coeffs[~odd], _canonical=True)
    odd_p = GrassmannPoly(p.registry, p.masks[odd], p.coeffs[odd], _canonical=True)
    return even_p, odd_p


def exp_nilpotent(p: GrassmannPoly) -> GrassmannPoly:
    """Exact exponential of a polynomial with no constant term."""
    if abs(p.constant()) >= DEDUP_THRESHOLD:
        raise NilpotencyError("exp_nilpotent needs a zero constant term; factor out exp(c) first")
    total = GrassmannPoly.scalar(p.registry, 1.0)
    term = total
    k = 0
    while True:
        k += 1
        term = multiply(term, p) / k
        if term.is_zero():
            return total
        total = total + term
