"""Pulse recipes, pulses, and pulse sequences.

A pulse contributes the Hamiltonian term ``operator * envelope(x, t)`` while
``t`` lies in its half-open active window ``[start, start + duration)``. A
sequence is an ordered list of pulses (overlap allowed, contributions sum)
plus an optional always-on static Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    ParamError,
    TimingError,
    ValidationError,
    WindowError,
)
from .operators import as_operator, require_hermitian


class Envelope:
    """Scalar envelope f(x, t): named real parameters x and time t to a real.

    Subclasses declare which parameters they consume via ``param_names`` and
    implement :meth:`bind`, which returns a plain ``t -> float`` closure with
    the parameters and pulse timing baked in. ``gated=True`` additionally
    bakes in the half-open window check (the closure returns 0.0 outside the
    window); this is the per-pulse activity inspection the naive engine pays
    for on every RHS evaluation.
    """

    kind: str = ""
    param_names: tuple[str, ...] = ()

    def validate(self, x: Mapping[str, float], duration: float) -> None:
        """Shape-specific domain checks, called once at pulse construction."""

    def bind(self, x: Mapping[str, float], start: float, duration: float,
             gated: bool = False) -> Callable[[float], float]:
        raise NotImplementedError

    def value(self, x: Mapping[str, float], t: float, start: float, duration: float) -> float:
        """One-off evaluation (reference path; hot loops use bind())."""
        return self.bind(x, start, duration)(t)

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))


class Constant(Envelope):
    """f = amp."""

    kind = "constant"
    param_names = ("amp",)

    def bind(self, x, start, duration, gated=False):
        amp = float(x["amp"])
        if not gated:
            return lambda t: amp
        end = start + duration
        return lambda t: amp if start <= t < end else 0.0


class Sinusoid(Envelope):
    """f = amp * cos(omega * (t - start) + phase); time reference is the
    pulse start, so identical pulses placed at different times behave
    identically (use ``phase`` for absolute-phase needs)."""

    kind = "sinusoid"
    param_names = ("amp", "omega", "phase")

    def bind(self, x, start, duration, gated=False):
        amp = float(x["amp"])
        omega = float(x["omega"])
        phase = float(x["phase"])
        cos = math.cos
        if not gated:
            return lambda t: amp * cos(omega * (t - start) + phase)
        end = start + duration
        return lambda t: amp * cos(omega * (t - start) + phase) if start <= t < end else 0.0


class Gaussian(Envelope):
    """f = amp * exp(-(t - center)^2 / (2 sigma^2)); center is absolute time."""

    kind = "gaussian"
    param_names = ("amp", "center", "sigma")

    def validate(self, x, duration):
        if not float(x["sigma"]) > 0:
            raise ParamError(f"gaussian sigma must be > 0, got {x['sigma']}")

    def bind(self, x, start, duration, gated=False):
        amp = float(x["amp"])
        center = float(x["center"])
        inv2s2 = 1.0 / (2.0 * float(x["sigma"]) ** 2)
        exp = math.exp
        if not gated:
            return lambda t: amp * exp(-((t - center) ** 2) * inv2s2)
        end = start + duration
        return lambda t: amp * exp(-((t - center) ** 2) * inv2s2) if start <= t < end else 0.0


class SmoothedSquare(Envelope):
    """Flat amplitude with cosine ramps of length ``ramp`` at both edges."""

    kind = "smoothed_square"
    param_names = ("amp", "ramp")

    def validate(self, x, duration):
        ramp = float(x["ramp"])
        if ramp < 0 or 2.0 * ramp > duration:
            raise ParamError(
                f"smoothed_square needs 0 <= 2*ramp <= duration, got ramp={ramp}, duration={duration}"
            )

    def bind(self, x, start, duration, gated=False):
        amp = float(x["amp"])
        ramp = float(x["ramp"])
        end = start + duration
        cos, pi = math.cos, math.pi

        def shape(t):
            rel = t - start
            if ramp > 0.0:
                if rel < ramp:
                    return amp * 0.5 * (1.0 - cos(pi * rel / ramp))
                tail = duration - rel
                if tail < ramp:
                    return amp * 0.5 * (1.0 - cos(pi * tail / ramp))
            return amp

        if not gated:
            return shape
        return lambda t: shape(t) if start <= t < end else 0.0


class TabulatedSamples(Envelope):
    """amp-scaled linear interpolation of (t_k, f_k) samples; t_k are
    relative to the pulse start and must be strictly increasing. Outside the
    sampled range the end values are held."""

    kind = "tabulated"
    param_names = ("amp",)

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValidationError("tabulated envelope needs two equal-length 1-D sample arrays, len >= 2")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("tabulated envelope sample times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValidationError("tabulated envelope samples must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        self.sample_times = t
        self.sample_values = v

    def bind(self, x, start, duration, gated=False):
        amp = float(x["amp"])
        st, sv = self.sample_times, self.sample_values

        def shape(t):
            return amp * float(np.interp(t - start, st, sv))

        if not gated:
            return shape
        end = start + duration
        return lambda t: shape(t) if start <= t < end else 0.0

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and np.array_equal(self.sample_times, other.sample_times)
            and np.array_equal(self.sample_values, other.sample_values)
        )

    def __hash__(self):
        return hash((type(self), self.sample_times.tobytes(), self.sample_values.tobytes()))


class NativeCallback(Envelope):
    """Host-supplied envelope ``fn(x, t_rel) -> float`` with t_rel = t - start.

    Library use only (not expressible in sequence files). The callback must
    be pure and safe to call concurrently.
    """

    kind = "callback"

    def __init__(self, fn: Callable[[Mapping[str, float], float], float],
                 param_names: Sequence[str] = ()):
        self.fn = fn
        self.param_names = tuple(param_names)

    def bind(self, x, start, duration, gated=False):
        fn = self.fn
        frozen = dict(x)
        if not gated:
            return lambda t: fn(frozen, t - start)
        end = start + duration
        return lambda t: fn(frozen, t - start) if start <= t < end else 0.0

    def __eq__(self, other):
        return type(self) is type(other) and self.fn is other.fn and self.param_names == other.param_names

    def __hash__(self):
        return hash((type(self), id(self.fn), self.param_names))


@dataclass(frozen=True, eq=False)
class PulseRecipe:
    """Reusable functional form: Hermitian operator, envelope shape, and
    parameter defaults. Pulses are instantiated from a recipe with concrete
    parameter values and timing."""

    operator: np.ndarray
    envelope: Envelope
    defaults: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        op = as_operator(self.operator)
        require_hermitian(op, what="pulse operator")
        object.__setattr__(self, "operator", op)
        extra = set(self.defaults) - set(self.envelope.param_names)
        if extra:
            raise ParamError(f"defaults name unknown parameters: {sorted(extra)}")
        object.__setattr__(self, "defaults", dict(self.defaults))

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PulseRecipe):
            return NotImplemented
        return (
            np.array_equal(self.operator, other.operator)
            and self.envelope == other.envelope
            and self.defaults == other.defaults
        )


@dataclass(frozen=True, eq=False)
class Pulse:
    """One timed Hamiltonian term: recipe + bound parameters + window.

    ``params`` is merged over the recipe defaults at construction; the
    active window is the half-open interval [start, start + duration).
    """

    recipe: PulseRecipe
    params: dict[str, float]
    start: float
    duration: float

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise TimingError(f"pulse duration must be > 0 and finite, got {self.duration}")
        if not math.isfinite(self.start):
            raise TimingError(f"pulse start must be finite, got {self.start}")
        schema = set(self.recipe.envelope.param_names)
        bound = dict(self.recipe.defaults)
        for name, value in self.params.items():
            if name not in schema:
                raise ParamError(f"unexpected parameter {name!r} (schema: {sorted(schema)})")
            bound[name] = value
        missing = schema - set(bound)
        if missing:
            raise ParamError(f"missing parameter(s) {sorted(missing)} and no defaults")
        for name, value in bound.items():
            v = float(value)
            if not math.isfinite(v):
                raise ParamError(f"parameter {name!r} must be a finite real, got {value!r}")
            bound[name] = v
        self.recipe.envelope.validate(bound, self.duration)
        object.__setattr__(self, "params", bound)
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "duration", float(self.duration))

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def dim(self) -> int:
        return self.recipe.dim

    def active_at(self, t: float) -> bool:
        return self.start <= t < self.end

    def bound_envelope(self, gated: bool = False) -> Callable[[float], float]:
        """Fast ``t -> f(x, t)`` closure; ``gated`` bakes in the window check."""
        return self.recipe.envelope.bind(self.params, self.start, self.duration, gated)

    def __eq__(self, other):
        if not isinstance(other, Pulse):
            return NotImplemented
        return (
            self.recipe == other.recipe
            and self.params == other.params
            and self.start == other.start
            and self.duration == other.duration
        )


def make_pulse(recipe: PulseRecipe, params: Mapping[str, float],
               start: float, duration: float) -> Pulse:
    """Instantiate a pulse, binding ``params`` against the recipe schema."""
    return Pulse(recipe, dict(params), start, duration)


def pulse_hamiltonian_at(pulse: Pulse, t: float) -> np.ndarray:
    """Hamiltonian contribution ``operator * f(x, t)`` at time ``t``.

    Raises WindowError outside the active window; the segmented evolver
    bypasses this check by construction, so a trip here is a bug.
    """
    if not pulse.active_at(t):
        raise WindowError(
            f"t={t} outside active window [{pulse.start}, {pulse.end}) of pulse"
        )
    f = pulse.recipe.envelope.value(pulse.params, t, pulse.start, pulse.duration)
    if not math.isfinite(f):
        raise ValidationError(f"envelope returned non-finite value {f!r} at t={t}")
    return pulse.recipe.operator * f


@dataclass(frozen=True, eq=False)
class PulseSequence:
    """Ordered pulses plus an optional static Hamiltonian."""

    pulses: tuple[Pulse, ...] = ()
    static_hamiltonian: np.ndarray | None = None
    dim: int = 0

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        static = self.static_hamiltonian
        if static is not None:
            static = as_operator(static)
            object.__setattr__(self, "static_hamiltonian", static)
        if not pulses and static is None:
            raise ValidationError("sequence needs at least one pulse or a static Hamiltonian")
        dim = self.dim
        if dim == 0:
            dim = pulses[0].dim if pulses else static.shape[0]
            object.__setattr__(self, "dim", dim)
        for i, p in enumerate(pulses):
            if p.dim != dim:
                raise DimensionError(f"pulse {i} is {p.dim}-dimensional, sequence is {dim}")
        if static is not None and static.shape[0] != dim:
            raise DimensionError(
                f"static Hamiltonian is {static.shape[0]}-dimensional, sequence is {dim}"
            )

    def __eq__(self, other):
        if not isinstance(other, PulseSequence):
            return NotImplemented
        if self.dim != other.dim or self.pulses != other.pulses:
            return False
        a, b = self.static_hamiltonian, other.static_hamiltonian
        if (a is None) != (b is None):
            return False
        return a is None or np.array_equal(a, b)


def total_hamiltonian_at(seq: PulseSequence, t: float) -> np.ndarray:
    """Naive per-time assembly: static part plus every pulse active at ``t``.

    This is the reference the segmented path is tested against; it inspects
    every pulse's window on each call.
    """
    if seq.static_hamiltonian is not None:
        h = seq.static_hamiltonian.copy()
    else:
        h = np.zeros((seq.dim, seq.dim), dtype=np.complex128)
    for p in seq.pulses:
        if p.active_at(t):
            h += pulse_hamiltonian_at(p, t)
    return h
