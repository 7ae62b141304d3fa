"""Verification suite: every identity the engine claims, with residuals.

Each ``check_*`` function returns one or more :class:`Check` records.  The
CLI ``verify`` command and the acceptance tests share these functions.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, boson, fock
from .fermion import (
    CorrelationQuery,
    PRepresentation,
    all_queries,
    compute_p,
    compute_phi,
    convert,
    correlation_direct,
    correlation_via_p,
    correlation_via_phi,
    normalization,
    pair_state,
    reconstruct,
    single_mode_state,
    g_registry,
)
from .grassmann import GeneratorRegistry, GrassmannPoly
from .kernel import (
    GradedKernel,
    coherent_bra,
    coherent_ket,
    displacement,
    graded_trace,
    identity_resolution_alternate,
    identity_resolution_standard,
    inner,
    kernel_multiply,
    overlap_function,
    projector,
    weyl_reconstruct_fermion,
)

EXACT_TOL = 1e-10
P_GRID = (40, 5.0, 101)  # dim, half-width, points for the thermal P checks
WEYL_GRID = (20, 6.0, 121)
P_GRID_NBAR = 1.0


@dataclass
class Check:
    name: str
    anchor: str
    status: str
    residual: float
    tolerance: float
    elapsed: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        return f"[{self.status.upper()}] {self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}"


@dataclass
class VerificationReport:
    scope: str
    seed: int
    suite_version: str = __version__
    checks: list[Check] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        n_pass = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass}

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timings: bool = True) -> dict:
        checks = []
        for c in self.checks:
            d = asdict(c)
            if not timings:
                d.pop("elapsed")
            checks.append(d)
        return {
            "suite_version": self.suite_version,
            "scope": self.scope,
            "seed": self.seed,
            "checks": checks,
            "summary": self.summary,
        }


def _check(name, anchor, residual, tol, t0, detail="", invert=False) -> Check:
    residual = float(residual)
    ok = residual > tol if invert else residual <= tol
    return Check(name, anchor, "pass" if ok else "fail", residual, tol, time.perf_counter() - t0, detail)


def _maxdiff(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max(initial=0.0))


# ---------------------------------------------------------------------------
# Fermionic checks
# ---------------------------------------------------------------------------


def check_identity_resolutions(modes=(1, 2, 3)) -> list[Check]:
    out = []
    for n in modes:
        t0 = time.perf_counter()
        r = _maxdiff(identity_resolution_standard(n), np.eye(1 << n))
        out.append(_check(f"identity_standard_n{n}", "resolution of identity by |g><g|", r, EXACT_TOL, t0))
        t0 = time.perf_counter()
        r = _maxdiff(identity_resolution_alternate(n), np.eye(1 << n))
        out.append(_check(f"identity_alternate_n{n}", "resolution of identity by f(g)|g><-g|", r, EXACT_TOL, t0))
    t0 = time.perf_counter()
    r = _maxdiff(identity_resolution_alternate(1, with_f=False), np.eye(2))
    out.append(
        _check("identity_alternate_without_f_is_not_identity", "role of the f(g) factor", r, 0.5, t0,
               detail="residual must exceed tolerance", invert=True)
    )
    return out


def _weyl_cases(seed):
    rng = np.random.default_rng(seed)
    cases = []
    # n = 1: every 2x2 matrix with 0/1 entries (16, covering the 4 basis operators)
    for bits in itertools.product((0, 1), repeat=4):
        cases.append(("n1", np.array(bits, dtype=complex).reshape(2, 2)))
    # n = 2: the 16 basis operators and 240 random matrices
    for r in range(4):
        for c in range(4):
            cases.append(("n2", fock.basis_operator(r, c, 2)))
    for _ in range(240):
        cases.append(("n2", rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))))
    for _ in range(10):
        cases.append(("n3", rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))))
    return cases


def check_weyl_fermion(seed=0) -> list[Check]:
    groups: dict[str, list[float]] = {}
    times: dict[str, float] = {}
    for tag, F in _weyl_cases(seed):
        t0 = time.perf_counter()
        groups.setdefault(tag, []).append(_maxdiff(weyl_reconstruct_fermion(F), F))
        times[tag] = times.get(tag, 0.0) + time.perf_counter() - t0
    out = []
    for tag, res in groups.items():
        c = _check(f"weyl_fermion_{tag}", "displacement completeness, k-integral form",
                   max(res), EXACT_TOL, time.perf_counter(), detail=f"{len(res)} operators")
        c.elapsed = times[tag]
        out.append(c)
    return out


P_GRID_VALUES = tuple(round(0.1 * i, 10) for i in range(11))


def check_single_mode_forms() -> list[Check]:
    reg = g_registry(1)
    g, gs = reg.pair(1)
    ggs = GrassmannPoly.generator(reg, g) * GrassmannPoly.generator(reg, gs)
    t0 = time.perf_counter()
    r_p, r_phi = 0.0, 0.0
    for p in P_GRID_VALUES:
        rho = single_mode_state(p)
        r_p = max(r_p, compute_p(rho).poly.max_abs_diff(-p + ggs))
        r_phi = max(r_phi, compute_phi(rho).poly.max_abs_diff(p + (1 - 2 * p) * ggs))
    # the alternative in-text form p + (2p-1)gg* must not reconstruct rho
    t1 = time.perf_counter()
    r_alt = 0.0
    for p in (0.1, 0.25, 0.4):
        alt = PRepresentation("phi", 1, p + (2 * p - 1) * ggs)
        r_alt = max(r_alt, _maxdiff(reconstruct(alt), single_mode_state(p)))
    return [
        _check("phi_sign_alternative_rejected", "sign of the gg* coefficient in phi", r_alt, 1e-3, t1,
               detail="p + (2p-1)gg* fails the roundtrip; u + (1-2u)gg* is adopted", invert=True),
        _check("single_mode_P_form", "P = -p + gg*", r_p, EXACT_TOL, t0, detail="p in 0.0..1.0"),
        _check("single_mode_phi_form", "phi = u + (1-2u)gg*, u = p", r_phi, EXACT_TOL, t0, detail="p in 0.0..1.0"),
    ]


def sample_states(seed=0, per_modes=20):
    """Single-mode grid, the 0.6/0.8 pair state, and seeded random states for n = 1, 2, 3."""
    rng = np.random.default_rng(seed)
    states = [(f"p={p}", single_mode_state(p)) for p in P_GRID_VALUES]
    states.append(("pair(0.6,0.8)", pair_state(0.6, 0.8)))
    for n in (1, 2, 3):
        for i in range(per_modes):
            states.append((f"random_n{n}_{i}", fock.random_superselected_state(n, rng)))
    return states


def check_normalization(states) -> list[Check]:
    t0 = time.perf_counter()
    r_p = r_w = r_unw = 0.0
    for _, rho in states:
        n = fock.modes_of(rho)
        r_p = max(r_p, abs(normalization(compute_p(rho)).value - 1))
        nphi = normalization(compute_phi(rho))
        r_w = max(r_w, abs(nphi.weighted - 1))
        if n == 1:
            r_unw = max(r_unw, abs(nphi.unweighted - (rho[0, 0] - rho[1, 1])))
    return [
        _check("normalization_P", "integral of P is 1", r_p, EXACT_TOL, t0),
        _check("normalization_phi_unweighted", "integral of phi is <0|rho|0> - <1|rho|1>", r_unw, EXACT_TOL, t0),
        _check("normalization_phi_weighted", "integral of w phi is 1", r_w, EXACT_TOL, t0),
    ]


def check_moments(states) -> list[Check]:
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for _, rho in states:
        n = fock.modes_of(rho)
        P, phi = compute_p(rho), compute_phi(rho)
        for q in all_queries(n):
            d = correlation_direct(rho, q)
            worst = max(worst, abs(correlation_via_p(P, q) - d), abs(correlation_via_phi(phi, q) - d))
            count += 1
    out = [_check("moments_triple_agreement", "normally ordered correlations via P, w*phi, trace",
                  worst, EXACT_TOL, t0, detail=f"{count} state/query pairs")]
    t0 = time.perf_counter()
    rho = pair_state(0.6, 0.8)
    q = CorrelationQuery.parse("c1+ c2+ c2 c1")
    vals = [correlation_via_p(compute_p(rho), q), correlation_via_phi(compute_phi(rho), q), correlation_direct(rho, q)]
    out.append(_check("pair_state_correlation_0.64", "normally ordered correlation function",
                      max(abs(v - 0.64) for v in vals), EXACT_TOL, t0))
    return out


def check_parity_selection(states) -> list[Check]:
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for _, rho in states:
        n = fock.modes_of(rho)
        P, phi = compute_p(rho), compute_phi(rho)
        for q in all_queries(n):
            if (len(q.creations) - len(q.annihilations)) % 2 == 0:
                continue
            for v in (correlation_via_p(P, q), correlation_via_phi(phi, q), correlation_direct(rho, q)):
                worst = max(worst, abs(v))
            count += 1
    return [_check("parity_selection_exact_zero", "correlations vanish unless p - q is even",
                   worst, 0.0, t0, detail=f"{count} odd queries")]


def check_conversion(states) -> list[Check]:
    t0 = time.perf_counter()
    r_inv = r_cross = r_even = 0.0
    for _, rho in states:
        P, phi = compute_p(rho), compute_phi(rho)
        r_inv = max(r_inv, convert(convert(P)).poly.max_abs_diff(P.poly), convert(convert(phi)).poly.max_abs_diff(phi.poly))
        r_cross = max(r_cross, convert(phi).poly.max_abs_diff(P.poly), convert(P).poly.max_abs_diff(phi.poly))
        for rep in (P, phi):
            odd = rep.poly.parity_split()[1]
            r_even = max(r_even, float(np.abs(odd.coeffs).max(initial=0.0)))
    return [
        _check("convert_involution", "P and phi related through f(g)", r_inv, EXACT_TOL, t0),
        _check("convert_phi_equals_compute_p", "P and phi related through f(g)", r_cross, EXACT_TOL, t0),
        _check("representations_even", "super-selection makes P and phi even", r_even, EXACT_TOL, t0),
    ]


def check_roundtrip(states) -> list[Check]:
    t0 = time.perf_counter()
    worst = 0.0
    for _, rho in states:
        worst = max(worst, _maxdiff(reconstruct(compute_p(rho)), rho), _maxdiff(reconstruct(compute_phi(rho)), rho))
    return [_check("reconstruction_roundtrip", "rho as integral over coherent projectors", worst, EXACT_TOL, t0)]


def random_poly(reg: GeneratorRegistry, rng, density=1.0) -> GrassmannPoly:
    terms = {}
    for deg in range(reg.count + 1):
        for mono in itertools.combinations(range(reg.count), deg):
            if rng.random() <= density:
                terms[mono] = complex(*rng.normal(size=2))
    return GrassmannPoly.from_terms(reg, terms)


def check_trace_theorem(seed=0, samples=5) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (1, 2):
        t0 = time.perf_counter()
        reg = g_registry(n)
        pairs = reg.pairs("g")
        proj = projector(n, reg, pairs, negated_bra=True)
        worst = 0.0
        for _ in range(samples):
            F = random_poly(reg, rng)
            lhs = graded_trace(kernel_multiply(GradedKernel.scalar(F, n), proj)).integrate_d2(pairs)
            rhs = F.parity_split()[0].integrate_d2(pairs)
            worst = max(worst, lhs.max_abs_diff(rhs))
        out.append(_check(f"trace_theorem_n{n}", "trace as integral of the even part", worst, EXACT_TOL, t0,
                          detail=f"{samples} mixed-parity F"))
    return out


def check_coherent_states() -> list[Check]:
    out = []
    # eigenvalue relations, multimode
    for n in (1, 2, 3):
        t0 = time.perf_counter()
        reg = g_registry(n)
        ket, bra = coherent_ket(n, reg), coherent_bra(n, reg)
        worst = 0.0
        for i in range(1, n + 1):
            g, gs = reg.pair(i)
            c = GradedKernel.embed(fock.annihilation(i, n), reg)
            cd = GradedKernel.embed(fock.creation(i, n), reg)
            lhs = kernel_multiply(c, ket)
            rhs = kernel_multiply(GradedKernel.scalar(GrassmannPoly.generator(reg, g), n), ket)
            worst = max(worst, lhs.max_abs_diff(rhs))
            lhs = kernel_multiply(bra, cd)
            rhs = kernel_multiply(bra, GradedKernel.scalar(GrassmannPoly.generator(reg, gs), n))
            worst = max(worst, lhs.max_abs_diff(rhs))
        out.append(_check(f"eigenvalue_relations_n{n}", "coherent states as eigenstates of c and c^dagger",
                          worst, EXACT_TOL, t0))
    # overlap vs exponential form
    t0 = time.perf_counter()
    reg = GeneratorRegistry.standard(1, ("g", "h"))
    gp, hp = reg.pair(1, "g"), reg.pair(1, "h")
    G = lambda i: GrassmannPoly.generator(reg, i)  # noqa: E731
    ov = inner(coherent_bra(1, reg, [gp]), coherent_ket(1, reg, [hp]))
    expo = (G(gp[1]) * G(gp[0]) * -0.5).exp() * (G(hp[1]) * G(hp[0]) * -0.5).exp() * (G(gp[1]) * G(hp[0])).exp()
    prod = (1 - G(gp[1]) * G(gp[0]) / 2) * (1 - G(hp[1]) * G(hp[0]) / 2) * (1 + G(gp[1]) * G(hp[0]))
    out.append(_check("overlap_exponential_form", "coherent-state overlap", max(ov.max_abs_diff(expo), ov.max_abs_diff(prod)),
                      EXACT_TOL, t0))
    # I(g1, g2, g3, g4)
    t0 = time.perf_counter()
    reg = GeneratorRegistry(tuple((i, s) for i in range(1, 5) for s in ("g", "g*")) + ((1, "h"), (1, "h*")))
    gs4 = [reg.pair(i) for i in range(1, 5)]
    I = overlap_function(*gs4, reg, reg.pair(1, "h"))
    ov = lambda a, b: inner(coherent_bra(1, reg, [a]), coherent_ket(1, reg, [b]))  # noqa: E731
    rhs = ov(gs4[1], gs4[3]) * ov(gs4[2], gs4[0])
    out.append(_check("overlap_function_I", "four-state overlap function", I.max_abs_diff(rhs), EXACT_TOL, t0))
    # displacement properties, n = 1 and 2
    for n in (1, 2):
        t0 = time.perf_counter()
        reg = g_registry(n)
        pairs = reg.pairs("g")
        D = displacement(n, reg, pairs)
        Dm = D.negate([i for pr in pairs for i in pr])
        ident = GradedKernel.identity(n, reg)
        from .kernel import antinormal_ordered_displacement, normal_ordered_displacement, vacuum

        r = max(
            kernel_multiply(D, Dm).max_abs_diff(ident),
            kernel_multiply(D, D.adjoint()).max_abs_diff(ident),
            normal_ordered_displacement(n, reg, pairs).max_abs_diff(D),
            antinormal_ordered_displacement(n, reg, pairs).max_abs_diff(D),
            kernel_multiply(D, vacuum(n, reg)).max_abs_diff(coherent_ket(n, reg, pairs)),
        )
        out.append(_check(f"displacement_properties_n{n}", "displacement operator orderings and unitarity", r,
                          EXACT_TOL, t0))
    return out


def fermion_checks(seed=0) -> list[Check]:
    states = sample_states(seed)
    checks = []
    checks += check_identity_resolutions()
    checks += check_weyl_fermion(seed)
    checks += check_single_mode_forms()
    checks += check_normalization(states)
    checks += check_moments(states)
    checks += check_conversion(states)
    checks += check_roundtrip(states)
    checks += check_trace_theorem(seed)
    checks += check_parity_selection(states)
    checks += check_coherent_states()
    return checks


# ---------------------------------------------------------------------------
# Bosonic checks
# ---------------------------------------------------------------------------


def check_thermal_p(nbar=P_GRID_NBAR, grid_params=P_GRID) -> list[Check]:
    dim, X, M = grid_params
    t0 = time.perf_counter()
    grid = boson.ComplexGrid(X, M)
    rho = boson.thermal_state(nbar, dim)
    P = boson.p_function_grid(rho, grid)
    err = float(np.abs(P.real - boson.thermal_p_exact(grid.nodes, nbar)).max())
    tag = f"nbar{nbar:g}"
    return [
        _check(f"thermal_P_shape_{tag}", "P as Fourier transform of the normal characteristic function",
               err, 1e-3, t0, detail=f"d={dim} halfwidth={X} points={M}"),
        _check(f"thermal_P_normalization_{tag}", "P normalization", abs(P.integral() - 1), 1e-3, t0),
        _check(f"thermal_P_number_moment_{tag}", "normally ordered moments from P",
               abs(boson.moment_from_p(P, 1, 1) - nbar), 1e-3, t0),
        _check(f"thermal_P_imag_residual_{tag}", "P is real", P.imag_residual, 1e-6, t0),
    ]


def check_thermal_normalizations(nbars=(0.5, 2.0), grid_params=P_GRID) -> list[Check]:
    dim, X, M = grid_params
    out = []
    for nbar in nbars:
        t0 = time.perf_counter()
        P = boson.p_function_grid(boson.thermal_state(nbar, dim), boson.ComplexGrid(X, M))
        out.append(_check(f"thermal_P_normalization_nbar{nbar:g}", "P normalization", abs(P.integral() - 1), 1e-3, t0))
    return out


def check_weyl_boson(grid_params=WEYL_GRID) -> list[Check]:
    dim, X, M = grid_params
    grid = boson.ComplexGrid(X, M)
    blk = boson.reliable_block(dim)
    out = []
    for name, (r, c) in (("ket0bra0", (0, 0)), ("ket0bra1", (0, 1))):
        t0 = time.perf_counter()
        F = np.zeros((dim, dim), dtype=complex)
        F[r, c] = 1.0
        R = boson.weyl_reconstruct_boson(F, grid)
        out.append(_check(f"weyl_boson_{name}", "Weyl expansion over displacement operators",
                          _maxdiff(R[blk, blk], F[blk, blk]), 1e-2, t0, detail=f"d={dim} halfwidth={X} points={M}"))
    return out


def check_boson_identities(seed=0, grid_params=WEYL_GRID) -> list[Check]:
    dim, X, M = grid_params
    grid = boson.ComplexGrid(X, M)
    rng = np.random.default_rng(seed)
    out = []
    t0 = time.perf_counter()
    r = 0.8 * np.sqrt(rng.random(4))
    th = rng.uniform(0, 2 * np.pi, 4)
    a, b, g, d = r * np.exp(1j * th)
    dim_i = max(dim, 30)
    I = boson.overlap_function_boson(a, b, g, d, grid, dim_i)
    exact = boson.coherent_overlap(g, a) * boson.coherent_overlap(b, d)
    out.append(_check("boson_overlap_function_I", "four-state overlap function", abs(I - exact), 1e-3, t0))
    t0 = time.perf_counter()
    blk = boson.reliable_block(dim)
    Id = boson.identity_resolution_boson(grid, dim)
    out.append(_check("boson_identity_resolution", "coherent-state resolution of identity",
                      _maxdiff(Id[blk, blk], np.eye(dim)[blk, blk]), 1e-2, t0))
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        z1, z2 = (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) / np.sqrt(2), (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) / np.sqrt(2)
        v1, v2 = boson.coherent_state(z1, 30), boson.coherent_state(z2, 30)
        worst = max(worst, abs(abs(np.vdot(v2, v1)) ** 2 - np.exp(-abs(z1 - z2) ** 2)))
    out.append(_check("boson_coherent_overlap", "coherent-state overlap", worst, 1e-8, t0))
    t0 = time.perf_counter()
    space = boson.TruncatedBosonSpace(20)
    r1 = _maxdiff(boson.boson_displacement(0.5, space)[:, 0], boson.coherent_state(0.5, 20))
    alpha = 0.6 - 0.7j
    r2 = _maxdiff(boson.normal_ordered_displacement(alpha, space)[:10, :10], boson.boson_displacement(alpha, space)[:10, :10])
    r3 = _maxdiff(boson.displacement_elements(alpha, 20)[:10, :10], boson.boson_displacement(alpha, space)[:10, :10])
    out.append(_check("boson_displacement_forms", "displacement operator orderings", max(r1, r2, r3), 1e-8, t0))
    return out


def boson_checks(seed=0, grid_params=WEYL_GRID) -> list[Check]:
    checks = []
    checks += check_thermal_p()
    checks += check_thermal_normalizations()
    checks += check_weyl_boson(grid_params)
    checks += check_boson_identities(seed, grid_params)
    return checks


def run_suite(scope: str = "all", seed: int = 0, grid_params=WEYL_GRID) -> VerificationReport:
    if scope not in ("fermion", "boson", "all"):
        raise ValueError("scope must be fermion, boson or all")
    report = VerificationReport(scope=scope, seed=seed)
    if scope in ("fermion", "all"):
        report.checks += fermion_checks(seed)
    if scope in ("boson", "all"):
        report.checks += boson_checks(seed, grid_params)
    return report
