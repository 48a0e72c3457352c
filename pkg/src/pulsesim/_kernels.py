"""Hot numeric kernels with two interchangeable backends.

Everything the integrator and the evolver call once per RHS evaluation or
once per Runge-Kutta stage lives here: Hamiltonian assembly from stacked
pulse operators, Schrodinger/Lindblad application, stage linear
combinations, and the scaled error norm.

Backend selection happens once at import time via the ``PULSESIM_BACKEND``
environment variable:

* ``numba`` -- require numba, fail loudly if it is missing;
* ``numpy`` -- pure numpy fallback, no compilation;
* unset / ``auto`` -- numba when importable, numpy otherwise.

Both backends compute the same quantities; within one backend results are
bit-reproducible across calls.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

_ENV_VAR = "PULSESIM_BACKEND"


# ---------------------------------------------------------------------------
# pure numpy implementations
# ---------------------------------------------------------------------------

def _np_assemble_hamiltonian(static, ops, coeffs):
    if coeffs.shape[0] == 0:
        return static.copy()
    return static + np.tensordot(coeffs, ops, axes=1)


def _np_schrodinger_apply(h, psi):
    return -1j * (h @ psi)


def _np_lindblad_apply(h, rho, cs, cdags, cdcs):
    out = -1j * (h @ rho - rho @ h)
    for k in range(cs.shape[0]):
        out += cs[k] @ rho @ cdags[k]
        out -= 0.5 * (cdcs[k] @ rho + rho @ cdcs[k])
    return out


def _np_schrodinger_deriv(static, ops, coeffs, psi):
    h = _np_assemble_hamiltonian(static, ops, coeffs)
    return -1j * (h @ psi)


def _np_lindblad_deriv(static, ops, coeffs, y, cs, cdags, cdcs):
    d = static.shape[0]
    h = _np_assemble_hamiltonian(static, ops, coeffs)
    rho = y.reshape((d, d), order="F")
    out = _np_lindblad_apply(h, rho, cs, cdags, cdcs)
    return out.flatten(order="F")


def _np_rk_combine(y0, k_rows, w, h):
    return y0 + h * (w @ k_rows[: w.shape[0]])


def _np_error_norm(k_all, ew, h, y0, y1, atol, rtol):
    err = np.abs(h * (ew @ k_all))
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(err / scale))


# ---------------------------------------------------------------------------
# loop bodies, compiled when the numba backend is active
# ---------------------------------------------------------------------------

def _loop_assemble_hamiltonian(static, ops, coeffs):
    d = static.shape[0]
    out = static.copy()
    for k in range(coeffs.shape[0]):
        c = coeffs[k]
        for i in range(d):
            for j in range(d):
                out[i, j] += c * ops[k, i, j]
    return out


def _loop_schrodinger_apply(h, psi):
    d = h.shape[0]
    out = np.empty(d, np.complex128)
    for i in range(d):
        acc = 0.0 + 0.0j
        for j in range(d):
            acc += h[i, j] * psi[j]
        out[i] = -1j * acc
    return out


def _loop_lindblad_apply(h, rho, cs, cdags, cdcs):
    out = -1j * (h @ rho - rho @ h)
    for k in range(cs.shape[0]):
        out += cs[k] @ rho @ cdags[k]
        out -= 0.5 * (cdcs[k] @ rho + rho @ cdcs[k])
    return out


def _loop_schrodinger_deriv(static, ops, coeffs, psi):
    d = static.shape[0]
    out = np.empty(d, np.complex128)
    for i in range(d):
        acc = 0.0 + 0.0j
        for j in range(d):
            hij = static[i, j]
            for k in range(coeffs.shape[0]):
                hij += coeffs[k] * ops[k, i, j]
            acc += hij * psi[j]
        out[i] = -1j * acc
    return out


def _loop_lindblad_deriv(static, ops, coeffs, y, cs, cdags, cdcs):
    d = static.shape[0]
    h = static.copy()
    for k in range(coeffs.shape[0]):
        c = coeffs[k]
        for i in range(d):
            for j in range(d):
                h[i, j] += c * ops[k, i, j]
    rho = np.empty((d, d), np.complex128)
    for j in range(d):
        base = d * j
        for i in range(d):
            rho[i, j] = y[base + i]
    drho = -1j * (h @ rho - rho @ h)
    for k in range(cs.shape[0]):
        drho += cs[k] @ rho @ cdags[k]
        drho -= 0.5 * (cdcs[k] @ rho + rho @ cdcs[k])
    out = np.empty(d * d, np.complex128)
    for j in range(d):
        base = d * j
        for i in range(d):
            out[base + i] = drho[i, j]
    return out


def _loop_rk_combine(y0, k_rows, w, h):
    n = y0.shape[0]
    s = w.shape[0]
    out = np.empty(n, np.complex128)
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(s):
            acc += w[j] * k_rows[j, i]
        out[i] = y0[i] + h * acc
    return out


def _loop_error_norm(k_all, ew, h, y0, y1, atol, rtol):
    n = y0.shape[0]
    s = ew.shape[0]
    worst = 0.0
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(s):
            acc += ew[j] * k_all[j, i]
        e = abs(h * acc)
        a0 = abs(y0[i])
        a1 = abs(y1[i])
        big = a0 if a0 > a1 else a1
        r = e / (atol + rtol * big)
        if np.isnan(r):
            return np.nan
        if r > worst:
            worst = r
    return worst


numpy_kernels = SimpleNamespace(
    name="numpy",
    assemble_hamiltonian=_np_assemble_hamiltonian,
    schrodinger_apply=_np_schrodinger_apply,
    lindblad_apply=_np_lindblad_apply,
    schrodinger_deriv=_np_schrodinger_deriv,
    lindblad_deriv=_np_lindblad_deriv,
    rk_combine=_np_rk_combine,
    error_norm=_np_error_norm,
)


def _build_numba_kernels():
    from numba import njit

    jit = njit(cache=True)
    return SimpleNamespace(
        name="numba",
        assemble_hamiltonian=jit(_loop_assemble_hamiltonian),
        schrodinger_apply=jit(_loop_schrodinger_apply),
        lindblad_apply=jit(_loop_lindblad_apply),
        schrodinger_deriv=jit(_loop_schrodinger_deriv),
        lindblad_deriv=jit(_loop_lindblad_deriv),
        rk_combine=jit(_loop_rk_combine),
        error_norm=jit(_loop_error_norm),
    )


def _select_backend():
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR}={choice!r}: expected 'numba', 'numpy', or 'auto'"
        )
    if choice == "numpy":
        return numpy_kernels
    try:
        return _build_numba_kernels()
    except ImportError:
        if choice == "numba":
            raise
        return numpy_kernels


active = _select_backend()

assemble_hamiltonian = active.assemble_hamiltonian
schrodinger_apply = active.schrodinger_apply
lindblad_apply = active.lindblad_apply
schrodinger_deriv = active.schrodinger_deriv
lindblad_deriv = active.lindblad_deriv
rk_combine = active.rk_combine
error_norm = active.error_norm


def backend_name() -> str:
    """Name of the kernel backend selected at import ('numba' or 'numpy')."""
    return active.name
