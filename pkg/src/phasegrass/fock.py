"""Dense fermionic Fock space with Jordan-Wigner mode operators.

Basis states are occupation bitstrings nu_1 ... nu_n with mode 1 leftmost,
ordered lexicographically (|0...0> first), so the row index of a state is
sum_i nu_i 2^(n-i).  The Jordan-Wigner string on mode i counts occupied
modes with index strictly less than i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-12


class ValidationError(ValueError):
    """A state description violates Hermiticity, trace, or positivity."""


class ParityViolationError(ValidationError):
    """A state description couples even and odd particle-number sectors."""


@dataclass(frozen=True)
class OccupationBasis:
    modes: int

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("need at least one mode")

    @property
    def dim(self) -> int:
        return 1 << self.modes

    def state(self, index: int) -> str:
        return format(index, f"0{self.modes}b")

    def index(self, bits: str) -> int:
        if len(bits) != self.modes or set(bits) - {"0", "1"}:
            raise ValidationError(f"occupation {bits!r} is not a {self.modes}-mode bitstring")
        return int(bits, 2)

    def occupation(self, index: int, mode: int) -> int:
        return (index >> (self.modes - mode)) & 1

    @property
    def parities(self) -> np.ndarray:
        return _parities(self.modes)

    def states(self) -> list[str]:
        return [self.state(i) for i in range(self.dim)]


@lru_cache(maxsize=None)
def _parities(n):
    p = np.array([bin(i).count("1") & 1 for i in range(1 << n)], dtype=np.int64)
    p.setflags(write=False)
    return p


def _check_mode(i, n):
    if not 1 <= i <= n:
        raise IndexError(f"mode {i} out of range 1..{n}")


@lru_cache(maxsize=None)
def _annihilation(i, n):
    dim = 1 << n
    c = np.zeros((dim, dim))
    bit = 1 << (n - i)
    for s in range(dim):
        if s & bit:
            # occupied modes 1..i-1 sit in the bits above `bit`
            string = bin(s >> (n - i + 1)).count("1")
            c[s ^ bit, s] = -1.0 if string & 1 else 1.0
    c.setflags(write=False)
    return c


def annihilation(i: int, n: int) -> np.ndarray:
    _check_mode(i, n)
    return _annihilation(i, n).astype(complex)


def creation(i: int, n: int) -> np.ndarray:
    _check_mode(i, n)
    return _annihilation(i, n).T.astype(complex)


def number(i: int, n: int) -> np.ndarray:
    return creation(i, n) @ annihilation(i, n)


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def trace(m: np.ndarray) -> complex:
    return complex(np.trace(m))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch {a.shape} @ {b.shape}")
    return a @ b


def modes_of(m: np.ndarray) -> int:
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if m.shape != (dim, dim) or (1 << n) != dim or n < 1:
        raise ValueError(f"{m.shape} is not a 2^n x 2^n Fock matrix")
    return n


def parity_decompose(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    par = _parities(modes_of(m))
    same = par[:, None] == par[None, :]
    return np.where(same, m, 0), np.where(same, 0, m)


def basis_operator(r: int, c: int, n: int) -> np.ndarray:
    m = np.zeros((1 << n, 1 << n), dtype=complex)
    m[r, c] = 1.0
    return m


def ket(bits: str) -> np.ndarray:
    basis = OccupationBasis(len(bits))
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(bits)] = 1.0
    return v


@dataclass
class StateSpec:
    """Density matrix given as a list of (bra, ket, value) elements.

    Element ``(b, k, v)`` sets ``rho[b, k] = v`` i.e. the coefficient of
    ``|b><k|``.  Missing Hermitian partners are implied.
    """

    modes: int
    elements: list[tuple[str, str, complex]] = field(default_factory=list)
    allow_parity_violation: bool = False
    skip_psd_check: bool = False

    @classmethod
    def from_dict(cls, data) -> "StateSpec":
        elements = []
        for e in data["elements"]:
            if isinstance(e, dict):
                b, k = e["bra"], e["ket"]
                v = complex(e.get("re", 0.0), e.get("im", 0.0)) if "value" not in e else _as_complex(e["value"])
            else:
                b, k, v = e[0], e[1], _as_complex(e[2])
            elements.append((str(b), str(k), v))
        flags = data.get("flags", {})
        return cls(
            modes=int(data["modes"]),
            elements=elements,
            allow_parity_violation=bool(flags.get("allow_parity_violation", data.get("allow_parity_violation", False))),
            skip_psd_check=bool(flags.get("skip_psd_check", data.get("skip_psd_check", False))),
        )

    @classmethod
    def load(cls, path) -> "StateSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: malformed state spec ({exc})") from None

    def to_dict(self) -> dict:
        return {
            "modes": self.modes,
            "elements": [[b, k, [v.real, v.imag]] for b, k, v in self.elements],
            "flags": {
                "allow_parity_violation": self.allow_parity_violation,
                "skip_psd_check": self.skip_psd_check,
            },
        }

    @classmethod
    def from_matrix(cls, rho: np.ndarray, tol=1e-15) -> "StateSpec":
        n = modes_of(rho)
        basis = OccupationBasis(n)
        els = [
            (basis.state(r), basis.state(c), complex(rho[r, c]))
            for r in range(basis.dim)
            for c in range(basis.dim)
            if abs(rho[r, c]) > tol
        ]
        return cls(n, els)


def _as_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    if isinstance(v, dict):
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def density_from_spec(spec: StateSpec) -> np.ndarray:
    basis = OccupationBasis(spec.modes)
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    given = np.zeros(rho.shape, dtype=bool)
    par = basis.parities
    for b, k, v in spec.elements:
        r, c = basis.index(b), basis.index(k)
        if not spec.allow_parity_violation and par[r] != par[c] and abs(v) > 0:
            raise ParityViolationError(
                f"element <{b}|rho|{k}> couples even and odd particle-number sectors"
            )
        if given[r, c] and abs(rho[r, c] - v) > HERMITIAN_TOL:
            raise ValidationError(f"element ({b}, {k}) given twice with different values")
        rho[r, c] = v
        given[r, c] = True
    for r, c in zip(*np.nonzero(given)):
        if given[c, r]:
            if abs(rho[c, r] - np.conj(rho[r, c])) > HERMITIAN_TOL:
                raise ValidationError(
                    f"not Hermitian: element ({basis.state(r)}, {basis.state(c)}) and its partner disagree"
                )
        else:
            rho[c, r] = np.conj(rho[r, c])
    if r_diag := [basis.state(i) for i in range(basis.dim) if abs(rho[i, i].imag) > HERMITIAN_TOL]:
        raise ValidationError(f"not Hermitian: complex diagonal element(s) {r_diag}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace is {tr!r}, expected 1")
    if not spec.skip_psd_check:
        lo = np.linalg.eigvalsh(rho).min()
        if lo < -PSD_TOL:
            raise ValidationError(f"not positive semidefinite: minimum eigenvalue {lo:.3e}")
    return rho


def is_superselected(rho: np.ndarray, tol=1e-12) -> bool:
    _, odd = parity_decompose(rho)
    return bool(np.abs(odd).max(initial=0.0) <= tol)


def random_superselected_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix, block diagonal in the parity sectors."""
    basis = OccupationBasis(n)
    par = basis.parities
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    w = rng.dirichlet([1.0, 1.0])
    for sector in (0, 1):
        idx = np.nonzero(par == sector)[0]
        a = rng.normal(size=(idx.size, idx.size)) + 1j * rng.normal(size=(idx.size, idx.size))
        block = a @ a.conj().T
        block /= np.trace(block).real
        rho[np.ix_(idx, idx)] = w[sector] * block
    return rho
