"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is picked via the NIL2_KERNELS environment variable:

    auto   use numba when importable, numpy otherwise (default)
    numba  require numba, fail loudly if missing
    numpy  force the pure-numpy path

All kernels operate on int64 arrays.  Exponent-vector kernels assume the
caller has checked that the code modulus M fits the vectorized overflow
bound (see core.VECTOR_LIMIT); coefficients are reduced mod M so every
intermediate stays far below 2**63.
"""

from __future__ import annotations

import os

import numpy as np

try:  # numba is an optional extra
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via NIL2_KERNELS=numpy
    numba = None
    njit = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations


def _reduce_np(E, radix, powtails, M):
    # single left-to-right pass; power tails only touch columns right of i
    k = radix.shape[0]
    for i in range(k):
        q = E[:, i] // radix[i]
        if not q.any():
            continue
        E[:, i] -= q * radix[i]
        q %= M
        row = powtails[i]
        for l in np.nonzero(row)[0]:
            E[:, l] += q * row[l]
    return E


def _accum_mul_np(E, X, Y, cj, ci, ctails, M):
    for p in range(cj.shape[0]):
        coef = (X[:, cj[p]] * Y[:, ci[p]]) % M
        E += coef[:, None] * ctails[p]
    return E


def _accum_comm_np(E, X, Y, cj, ci, ctails, M):
    for p in range(cj.shape[0]):
        j, i = cj[p], ci[p]
        coef = (X[:, j] * Y[:, i] - X[:, i] * Y[:, j]) % M
        E += coef[:, None] * ctails[p]
    return E


def _accum_pow_np(E, X, cb, cj, ci, ctails, M):
    for p in range(cj.shape[0]):
        coef = (cb * ((X[:, cj[p]] * X[:, ci[p]]) % M)) % M
        E += coef[:, None] * ctails[p]
    return E


def _min_label_np(labels, perms):
    # pointer-jumping min propagation; fixpoint labels are the least dense
    # index in each orbit of the group generated by the permutations
    while True:
        before = labels.copy()
        for p in range(perms.shape[0]):
            np.minimum(labels, labels[perms[p]], out=labels)
        np.minimum(labels, labels[labels], out=labels)
        if np.array_equal(before, labels):
            return labels


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _reduce_nb(E, radix, powtails, M):
        N, k = E.shape
        for r in range(N):
            for i in range(k):
                v = E[r, i]
                q = v // radix[i]
                if q != 0:
                    E[r, i] = v - q * radix[i]
                    q = q % M
                    if q != 0:
                        for l in range(i + 1, k):
                            t = powtails[i, l]
                            if t != 0:
                                E[r, l] += q * t
        return E

    @njit(cache=True)
    def _accum_mul_nb(E, X, Y, cj, ci, ctails, M):
        N = E.shape[0]
        P = cj.shape[0]
        k = E.shape[1]
        for p in range(P):
            j = cj[p]
            i = ci[p]
            for r in range(N):
                coef = (X[r, j] * Y[r, i]) % M
                if coef != 0:
                    for l in range(k):
                        t = ctails[p, l]
                        if t != 0:
                            E[r, l] += coef * t
        return E

    @njit(cache=True)
    def _accum_comm_nb(E, X, Y, cj, ci, ctails, M):
        N = E.shape[0]
        P = cj.shape[0]
        k = E.shape[1]
        for p in range(P):
            j = cj[p]
            i = ci[p]
            for r in range(N):
                coef = (X[r, j] * Y[r, i] - X[r, i] * Y[r, j]) % M
                if coef != 0:
                    for l in range(k):
                        t = ctails[p, l]
                        if t != 0:
                            E[r, l] += coef * t
        return E

    @njit(cache=True)
    def _accum_pow_nb(E, X, cb, cj, ci, ctails, M):
        N = E.shape[0]
        P = cj.shape[0]
        k = E.shape[1]
        for p in range(P):
            j = cj[p]
            i = ci[p]
            for r in range(N):
                coef = (cb * ((X[r, j] * X[r, i]) % M)) % M
                if coef != 0:
                    for l in range(k):
                        t = ctails[p, l]
                        if t != 0:
                            E[r, l] += coef * t
        return E

    @njit(cache=True)
    def _min_label_nb(labels, perms):
        # union-find, components rooted at their least member
        N = labels.shape[0]
        P = perms.shape[0]
        parent = np.arange(N)
        for p in range(P):
            for i in range(N):
                a = i
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                b = perms[p, i]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a < b:
                    parent[b] = a
                elif b < a:
                    parent[a] = b
        for i in range(N):
            a = i
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            labels[i] = a
        return labels


# ---------------------------------------------------------------------------
# backend selection

_BACKENDS = {"numpy": False}
if HAVE_NUMBA:
    _BACKENDS["numba"] = True

_current = {"name": None}
_IMPL = {}


def set_backend(name: str) -> str:
    """Select the kernel backend ("numba", "numpy" or "auto")."""
    if name == "auto":
        name = "numba" if HAVE_NUMBA else "numpy"
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("NIL2_KERNELS=numba but numba is not importable")
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba":
        _IMPL.update(
            reduce=_reduce_nb,
            accum_mul=_accum_mul_nb,
            accum_comm=_accum_comm_nb,
            accum_pow=_accum_pow_nb,
            min_label=_min_label_nb,
        )
    else:
        _IMPL.update(
            reduce=_reduce_np,
            accum_mul=_accum_mul_np,
            accum_comm=_accum_comm_np,
            accum_pow=_accum_pow_np,
            min_label=_min_label_np,
        )
    _current["name"] = name
    return name


def backend_name() -> str:
    return _current["name"]


set_backend(os.environ.get("NIL2_KERNELS", "auto"))


# ---------------------------------------------------------------------------
# public entry points


def reduce_exps(E, radix, powtails, M):
    """Normalize exponent rows in place: 0 <= E[:, i] < radix[i]."""
    if E.dtype == object:  # exact big-int path bypasses numba
        return _reduce_np(E, radix, powtails, M)
    return _IMPL["reduce"](E, radix, powtails, M)


def accum_mul(E, X, Y, cj, ci, ctails, M):
    """E += sum over comm pairs of (X[:,j] * Y[:,i] mod M) * tail."""
    if E.dtype == object:
        return _accum_mul_np(E, X, Y, cj, ci, ctails, M)
    return _IMPL["accum_mul"](E, X, Y, cj, ci, ctails, M)


def accum_comm(E, X, Y, cj, ci, ctails, M):
    """E += sum over comm pairs of ((X_j Y_i - X_i Y_j) mod M) * tail."""
    if E.dtype == object:
        return _accum_comm_np(E, X, Y, cj, ci, ctails, M)
    return _IMPL["accum_comm"](E, X, Y, cj, ci, ctails, M)


def accum_pow(E, X, cb, cj, ci, ctails, M):
    """E += sum over comm pairs of (cb * X_j X_i mod M) * tail."""
    if E.dtype == object:
        return _accum_pow_np(E, X, cb, cj, ci, ctails, M)
    return _IMPL["accum_pow"](E, X, cb, cj, ci, ctails, M)


def min_label_fixpoint(labels, perms):
    """Relabel each index by the least index reachable under the perms."""
    if perms.shape[0] == 0:
        return labels
    return _IMPL["min_label"](labels, perms)
