"""Shared test helpers: random sequence generation and an independent
piecewise-constant propagator oracle (scipy expm, no integrator involved)."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg

import pulsesim as ps


def rand_herm(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    # keep spectral scale moderate so tight-tolerance runs stay cheap
    return scale * h / max(1.0, np.linalg.norm(h, 2) / 2.0)


def rand_ket(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def rand_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def _sin2_callback(x, t_rel):
    return x["amp"] * math.sin(math.pi * t_rel) ** 2


ENVELOPE_KINDS = ("constant", "sinusoid", "gaussian", "smoothed_square", "tabulated", "callback")


def rand_pulse(rng, dim, window=2.0, kinds=ENVELOPE_KINDS):
    start = float(rng.uniform(0.0, 0.9 * window))
    duration = float(rng.uniform(0.15, 1.0))
    kind = kinds[int(rng.integers(len(kinds)))]
    op = rand_herm(rng, dim)
    if kind == "constant":
        recipe = ps.PulseRecipe(op, ps.Constant())
        params = {"amp": float(rng.uniform(0.3, 2.0))}
    elif kind == "sinusoid":
        recipe = ps.PulseRecipe(op, ps.Sinusoid())
        params = {
            "amp": float(rng.uniform(0.3, 2.0)),
            "omega": float(rng.uniform(1.0, 8.0)),
            "phase": float(rng.uniform(0.0, 2 * math.pi)),
        }
    elif kind == "gaussian":
        recipe = ps.PulseRecipe(op, ps.Gaussian())
        params = {
            "amp": float(rng.uniform(0.3, 2.0)),
            "center": start + float(rng.uniform(0.0, duration)),
            "sigma": float(rng.uniform(0.05, 0.5)),
        }
    elif kind == "smoothed_square":
        recipe = ps.PulseRecipe(op, ps.SmoothedSquare())
        params = {
            "amp": float(rng.uniform(0.3, 2.0)),
            "ramp": duration * float(rng.uniform(0.0, 0.5)),
        }
    elif kind == "tabulated":
        knots = np.linspace(0.0, duration, 4)
        values = rng.uniform(-1.5, 1.5, size=4)
        recipe = ps.PulseRecipe(op, ps.TabulatedSamples(knots, values))
        params = {"amp": float(rng.uniform(0.5, 1.5))}
    else:
        recipe = ps.PulseRecipe(op, ps.NativeCallback(_sin2_callback, ("amp",)))
        params = {"amp": float(rng.uniform(0.3, 2.0))}
    return ps.make_pulse(recipe, params, start, duration)


def random_spec(rng, dim=None, n_pulses=None, allow_collapse=True,
                rtol=1e-10, atol=1e-12, window=2.0):
    """Random overlapping sequence with mixed envelope kinds; optionally open."""
    dim = dim if dim is not None else int(rng.integers(2, 9))
    n_pulses = n_pulses if n_pulses is not None else int(rng.integers(1, 21))
    pulses = tuple(rand_pulse(rng, dim, window) for _ in range(n_pulses))
    static = rand_herm(rng, dim) if rng.uniform() < 0.7 else None
    seq = ps.PulseSequence(pulses, static)

    collapse = ()
    if allow_collapse and rng.uniform() < 0.5:
        n_c = int(rng.integers(1, 3))
        collapse = tuple(
            0.35 * (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(dim)
            for _ in range(n_c)
        )

    if rng.uniform() < 0.2:
        initial = ps.density(rand_density(rng, dim))
    else:
        initial = ps.ket(rand_ket(rng, dim))

    times = np.linspace(0.0, window, int(rng.integers(5, 10)))
    return ps.EvolveSpec(seq, initial, times, collapse_ops=collapse,
                         ode=ps.OdeOptions(rtol=rtol, atol=atol))


def expm_propagate(seq: ps.PulseSequence, psi0, times):
    """Exact piecewise-constant evolution of a ket: brute-force product of
    interval propagators expm(-i H dt). Only valid when every envelope is
    constant; fully independent of the integrator and segmentation code."""
    for p in seq.pulses:
        assert p.recipe.envelope.kind == "constant", "oracle needs constant envelopes"
    times = np.asarray(times, dtype=float)
    edges = sorted(
        {float(t) for t in times}
        | {float(e) for p in seq.pulses for e in (p.start, p.end) if times[0] < e < times[-1]}
    )
    want = {float(t): i for i, t in enumerate(times)}
    out = np.empty((times.size, len(psi0)), dtype=np.complex128)
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    if edges[0] in want:
        out[want[edges[0]]] = psi
    for a, b in zip(edges[:-1], edges[1:]):
        h = ps.total_hamiltonian_at(seq, 0.5 * (a + b))
        psi = scipy.linalg.expm(-1j * h * (b - a)) @ psi
        if b in want:
            out[want[b]] = psi
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(0)
