"""Compiled inner loops for qubit-structured Hamiltonians.

Every kernel works on operators of the form

    H(t) = cx(t) * (n - sum_k X_k) + c0(t) * diag(d0) + c1(t) * diag(d1)

where ``X_k`` flips bit ``k`` of the basis index.  Time-dependent
coefficients are sampled on the half-step grid ``t0 + j * dt / 2``; a
length-1 coefficient array means "constant".
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def hypercube_apply(out, psi, n, cx, diag):
    N = psi.shape[0]
    for i in range(N):
        acc = 0j
        for k in range(n):
            acc += psi[i ^ (1 << k)]
        out[i] = cx * (n * psi[i] - acc) + diag[i] * psi[i]


@njit(cache=True, nogil=True)
def _deriv(out, x, n, cx, a0, d0, a1, d1):
    # out = -i H x
    N = x.shape[0]
    for i in range(N):
        acc = 0j
        for k in range(n):
            acc += x[i ^ (1 << k)]
        hx = cx * (n * x[i] - acc) + (a0 * d0[i] + a1 * d1[i]) * x[i]
        out[i] = complex(hx.imag, -hx.real)


@njit(cache=True)
def _coef(arr, j):
    if arr.shape[0] == 1:
        return arr[0]
    return arr[j]


@njit(cache=True, nogil=True)
def rk4_structured(psi, n, dt, nsteps, cx, c0, d0, c1, d1):
    """Advance ``psi`` in place by ``nsteps`` classical RK4 steps."""
    N = psi.shape[0]
    k = np.empty(N, dtype=np.complex128)
    acc = np.empty(N, dtype=np.complex128)
    tmp = np.empty(N, dtype=np.complex128)
    half = 0.5 * dt
    for s in range(nsteps):
        j0 = 2 * s
        _deriv(k, psi, n, _coef(cx, j0), _coef(c0, j0), d0, _coef(c1, j0), d1)
        for i in range(N):
            acc[i] = k[i]
            tmp[i] = psi[i] + half * k[i]
        _deriv(k, tmp, n, _coef(cx, j0 + 1), _coef(c0, j0 + 1), d0, _coef(c1, j0 + 1), d1)
        for i in range(N):
            acc[i] += 2.0 * k[i]
            tmp[i] = psi[i] + half * k[i]
        _deriv(k, tmp, n, _coef(cx, j0 + 1), _coef(c0, j0 + 1), d0, _coef(c1, j0 + 1), d1)
        for i in range(N):
            acc[i] += 2.0 * k[i]
            tmp[i] = psi[i] + dt * k[i]
        _deriv(k, tmp, n, _coef(cx, j0 + 2), _coef(c0, j0 + 2), d0, _coef(c1, j0 + 2), d1)
        for i in range(N):
            psi[i] += (dt / 6.0) * (acc[i] + k[i])


@njit(cache=True, nogil=True)
def _csr_deriv(out, indptr, indices, data, x):
    for i in range(x.shape[0]):
        acc = 0j
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = complex(acc.imag, -acc.real)


@njit(cache=True, nogil=True)
def rk4_csr(psi, indptr, indices, data, dt, nsteps):
    """RK4 for a static CSR Hamiltonian, advancing ``psi`` in place."""
    N = psi.shape[0]
    k = np.empty(N, dtype=np.complex128)
    acc = np.empty(N, dtype=np.complex128)
    tmp = np.empty(N, dtype=np.complex128)
    half = 0.5 * dt
    for _ in range(nsteps):
        _csr_deriv(k, indptr, indices, data, psi)
        for i in range(N):
            acc[i] = k[i]
            tmp[i] = psi[i] + half * k[i]
        _csr_deriv(k, indptr, indices, data, tmp)
        for i in range(N):
            acc[i] += 2.0 * k[i]
            tmp[i] = psi[i] + half * k[i]
        _csr_deriv(k, indptr, indices, data, tmp)
        for i in range(N):
            acc[i] += 2.0 * k[i]
            tmp[i] = psi[i] + dt * k[i]
        _csr_deriv(k, indptr, indices, data, tmp)
        for i in range(N):
            psi[i] += (dt / 6.0) * (acc[i] + k[i])


@njit(cache=True, nogil=True)
def _banded_stage(x, offsets, diags, psi, acc, y, w, c, first):
    # k = -i H x;  acc = k (first) or acc += w k;  y = psi + c k
    N = x.shape[0]
    for i in range(N):
        v = 0j
        for d in range(offsets.shape[0]):
            j = i + offsets[d]
            if 0 <= j < N:
                v += diags[d, i] * x[j]
        k = complex(v.imag, -v.real)
        if first:
            acc[i] = k
        else:
            acc[i] += w * k
        y[i] = psi[i] + c * k


@njit(cache=True, nogil=True)
def rk4_banded(psi, offsets, diags, dt, nsteps):
    """RK4 for a banded Hamiltonian stored by rows: ``H[i, i + off[d]] = diags[d, i]``.

    Neighbours outside ``psi`` are treated as zero amplitude.
    """
    N = psi.shape[0]
    acc = np.empty(N, dtype=np.complex128)
    ya = np.empty(N, dtype=np.complex128)
    yb = np.empty(N, dtype=np.complex128)
    half = 0.5 * dt
    for _ in range(nsteps):
        _banded_stage(psi, offsets, diags, psi, acc, ya, 1.0, half, True)
        _banded_stage(ya, offsets, diags, psi, acc, yb, 2.0, half, False)
        _banded_stage(yb, offsets, diags, psi, acc, ya, 2.0, dt, False)
        _banded_stage(ya, offsets, diags, psi, acc, yb, 1.0, 0.0, False)
        for i in range(N):
            psi[i] += (dt / 6.0) * acc[i]
