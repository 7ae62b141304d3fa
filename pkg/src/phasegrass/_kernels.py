"""Hot inner loops, with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and the environment
variable ``PHASEGRASS_DISABLE_NUMBA`` is unset (or ``0``).  Both paths are
always importable as ``*_numba`` / ``*_numpy`` so they can be compared
against each other; the unsuffixed names are the selected backend.
"""

import os
from math import lgamma

import numpy as np

_flag = os.environ.get("PHASEGRASS_DISABLE_NUMBA", "0").strip().lower()
DISABLE_NUMBA = _flag not in ("", "0", "false", "no")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and not DISABLE_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"

# ---------------------------------------------------------------------------
# Grassmann monomial products
#
# A monomial is an int64 bitmask over registry indices; canonical order is
# ascending index.  The product of two monomials A, B is zero when they share
# a generator, otherwise A|B with sign (-1)^#{(a, b): a in A, b in B, a > b}.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _merge_sign(a, b):
    inv = 0
    bb = b
    while bb:
        low = bb & -bb
        # generators of a strictly above this generator of b
        inv += _popcount(a & ~((low << 1) - 1))
        bb ^= low
    return -1.0 if inv & 1 else 1.0


@njit(cache=True)
def poly_product_numba(ma, ca, mb, cb):
    n = 0
    for i in range(ma.shape[0]):
        for j in range(mb.shape[0]):
            if ma[i] & mb[j] == 0:
                n += 1
    out_m = np.empty(n, dtype=np.int64)
    out_c = np.empty(n, dtype=np.complex128)
    k = 0
    for i in range(ma.shape[0]):
        a = ma[i]
        for j in range(mb.shape[0]):
            b = mb[j]
            if a & b == 0:
                out_m[k] = a | b
                out_c[k] = _merge_sign(a, b) * ca[i] * cb[j]
                k += 1
    return out_m, out_c


def poly_product_numpy(ma, ca, mb, cb):
    if ma.size == 0 or mb.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.complex128)
    A = ma[:, None]
    B = mb[None, :]
    keep = (A & B) == 0
    nbits = int(max(int(ma.max()), int(mb.max()))).bit_length()
    inv = np.zeros(keep.shape, dtype=np.int64)
    for j in range(nbits):
        bj = (mb >> j) & 1
        if not bj.any():
            continue
        above = np.bitwise_count(ma >> (j + 1)).astype(np.int64)
        inv += above[:, None] * bj[None, :]
    sign = 1.0 - 2.0 * (inv & 1)
    coef = sign * ca[:, None] * cb[None, :]
    return (A | B)[keep].astype(np.int64), coef[keep]


# ---------------------------------------------------------------------------
# Bosonic normally ordered displacement elements
#
#   <m| exp(xi a^+) exp(-xi^* a) |n> =
#       sqrt(n!/m!) xi^(m-n) L_n^(m-n)(|xi|^2)          m >= n
#       sqrt(m!/n!) (-xi^*)^(n-m) L_m^(n-m)(|xi|^2)     m <  n
#
# evaluated with the forward three-term Laguerre recurrence, which avoids the
# catastrophic cancellation of the explicit double sum at large |xi|.
# ---------------------------------------------------------------------------


def _sqrt_fact_ratio(d):
    lg = np.array([lgamma(k + 1.0) for k in range(d)])
    # table[n, m] = sqrt(n!/m!)
    return np.exp(0.5 * (lg[:, None] - lg[None, :]))


@njit(cache=True)
def _normal_matrix_into(xi, fr, out):
    d = out.shape[0]
    x = xi.real * xi.real + xi.imag * xi.imag
    mxc = -np.conj(xi)
    pw = 1.0 + 0.0j
    pwc = 1.0 + 0.0j
    for al in range(d):
        l_prev = 0.0
        l_cur = 1.0
        for n in range(d - al):
            if n == 1:
                l_prev, l_cur = l_cur, 1.0 + al - x
            elif n > 1:
                nn = n - 1
                l_next = ((2 * nn + 1 + al - x) * l_cur - (nn + al) * l_prev) / (nn + 1)
                l_prev, l_cur = l_cur, l_next
            m = n + al
            f = fr[n, m]
            out[m, n] = f * pw * l_cur
            if al > 0:
                out[n, m] = f * pwc * l_cur
        pw *= xi
        pwc *= mxc


@njit(cache=True)
def normal_matrix_numba(xi, d):
    fr = np.empty((d, d))
    for n in range(d):
        for m in range(d):
            fr[n, m] = np.exp(0.5 * (_lgamma1(n) - _lgamma1(m)))
    out = np.zeros((d, d), dtype=np.complex128)
    _normal_matrix_into(xi, fr, out)
    return out


@njit(cache=True)
def _lgamma1(n):
    s = 0.0
    for k in range(2, n + 1):
        s += np.log(k)
    return s


def normal_matrix_numpy(xi, d):
    return normal_matrix_stack_numpy(np.array([xi], dtype=np.complex128), d)[0]


def normal_matrix_stack_numpy(xis, d):
    """Normally ordered displacement matrices for a 1-D array of nodes."""
    xis = np.asarray(xis, dtype=np.complex128)
    g = xis.shape[0]
    fr = _sqrt_fact_ratio(d)
    x = np.abs(xis) ** 2
    out = np.zeros((g, d, d), dtype=np.complex128)
    pw = np.ones(g, dtype=np.complex128)
    pwc = np.ones(g, dtype=np.complex128)
    mxc = -np.conj(xis)
    for al in range(d):
        l_prev = np.zeros(g)
        l_cur = np.ones(g)
        for n in range(d - al):
            if n == 1:
                l_prev, l_cur = l_cur, 1.0 + al - x
            elif n > 1:
                nn = n - 1
                l_prev, l_cur = l_cur, ((2 * nn + 1 + al - x) * l_cur - (nn + al) * l_prev) / (nn + 1)
            m = n + al
            out[:, m, n] = fr[n, m] * pw * l_cur
            if al > 0:
                out[:, n, m] = fr[n, m] * pwc * l_cur
        pw = pw * xis
        pwc = pwc * mxc
    return out


@njit(cache=True)
def normal_matrix_stack_numba(xis, d):
    fr = np.empty((d, d))
    for n in range(d):
        for m in range(d):
            fr[n, m] = np.exp(0.5 * (_lgamma1(n) - _lgamma1(m)))
    out = np.zeros((xis.shape[0], d, d), dtype=np.complex128)
    for k in range(xis.shape[0]):
        _normal_matrix_into(xis[k], fr, out[k])
    return out


@njit(cache=True)
def char_normal_nodes_numba(rho, xis):
    d = rho.shape[0]
    fr = np.empty((d, d))
    for n in range(d):
        for m in range(d):
            fr[n, m] = np.exp(0.5 * (_lgamma1(n) - _lgamma1(m)))
    out = np.empty(xis.shape[0], dtype=np.complex128)
    mat = np.zeros((d, d), dtype=np.complex128)
    for k in range(xis.shape[0]):
        _normal_matrix_into(xis[k], fr, mat)
        s = 0.0 + 0.0j
        for i in range(d):
            for j in range(d):
                s += rho[i, j] * mat[j, i]
        out[k] = s
    return out


def char_normal_nodes_numpy(rho, xis, chunk=512):
    xis = np.asarray(xis, dtype=np.complex128)
    d = rho.shape[0]
    out = np.empty(xis.shape[0], dtype=np.complex128)
    for s in range(0, xis.shape[0], chunk):
        mats = normal_matrix_stack_numpy(xis[s : s + chunk], d)
        out[s : s + chunk] = np.einsum("ij,kji->k", rho, mats)
    return out


@njit(cache=True)
def weyl_sum_numba(F, xis, weight):
    """sum_k weight * Tr[F D(xi_k)] D(-xi_k) with exact displacement elements."""
    d = F.shape[0]
    fr = np.empty((d, d))
    for n in range(d):
        for m in range(d):
            fr[n, m] = np.exp(0.5 * (_lgamma1(n) - _lgamma1(m)))
    acc = np.zeros((d, d), dtype=np.complex128)
    mat = np.zeros((d, d), dtype=np.complex128)
    for k in range(xis.shape[0]):
        xi = xis[k]
        _normal_matrix_into(xi, fr, mat)
        g = np.exp(-0.5 * (xi.real * xi.real + xi.imag * xi.imag))
        t = 0.0 + 0.0j
        for i in range(d):
            for j in range(d):
                t += F[i, j] * mat[j, i]
        t *= g * weight
        # D(-xi) = D(xi)^dagger
        for i in range(d):
            for j in range(d):
                acc[i, j] += t * g * np.conj(mat[j, i])
    return acc


def weyl_sum_numpy(F, xis, weight, chunk=512):
    xis = np.asarray(xis, dtype=np.complex128)
    d = F.shape[0]
    acc = np.zeros((d, d), dtype=np.complex128)
    for s in range(0, xis.shape[0], chunk):
        part = xis[s : s + chunk]
        g = np.exp(-0.5 * np.abs(part) ** 2)
        D = normal_matrix_stack_numpy(part, d) * g[:, None, None]
        t = np.einsum("ij,kji->k", F, D) * weight
        acc += np.einsum("k,kji->ij", t, D.conj())
    return acc


if USE_NUMBA:
    poly_product = poly_product_numba
    normal_matrix = normal_matrix_numba
    normal_matrix_stack = normal_matrix_stack_numba
    char_normal_nodes = char_normal_nodes_numba
    weyl_sum = weyl_sum_numba
else:
    poly_product = poly_product_numpy
    normal_matrix = normal_matrix_numpy
    normal_matrix_stack = normal_matrix_stack_numpy
    char_normal_nodes = char_normal_nodes_numpy
    weyl_sum = weyl_sum_numpy
