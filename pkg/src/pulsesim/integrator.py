"""Adaptive explicit Runge-Kutta integration of complex linear ODEs.

Dormand-Prince 5(4): seven stages, fifth-order propagation with an embedded
fourth-order error estimate (FSAL, so six RHS evaluations per attempted step
after the first) and the standard quartic dense-output interpolant. States
are flat complex vectors and are integrated directly in complex arithmetic;
the tableau is real, so nothing changes versus a split real/imaginary
formulation except bookkeeping.

Error control uses the scaled max norm

    err = max_i |e_i| / (atol + rtol * max(|y0_i|, |y1_i|))

with a step accepted when err <= 1, safety factor 0.9, and growth clamped to
[0.2, 5.0]. Requested output times are reported from the dense interpolant,
so steps are never forced onto them; the final step lands exactly on t_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import BudgetError, NumericsError, StiffnessError, TimingError, ValidationError

# Dormand & Prince (1980) 5(4) tableau; dense-output quartic from Shampine's
# continuous extension (the same constants ode45-style solvers use).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)

_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)

# Fifth-order weights are the last A row (FSAL); e = b5 - b4.
_B = _A[5]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_UNDERFLOW = 1e-15  # relative to the interval span


@dataclass(frozen=True)
class OdeOptions:
    """Tolerances and guards for :func:`integrate`."""

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None      # default: interval length
    initial_step: float | None = None  # default: automatic selection
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValidationError(f"rtol and atol must be > 0, got {self.rtol}, {self.atol}")
        if self.max_step is not None and not self.max_step > 0:
            raise ValidationError(f"max_step must be > 0, got {self.max_step}")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValidationError(f"initial_step must be > 0, got {self.initial_step}")
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass
class IntegratorStats:
    steps_accepted: int = 0
    steps_rejected: int = 0
    rhs_evals: int = 0


@dataclass
class IntegrationResult:
    """States at the requested eval times plus the endpoint state."""

    states: np.ndarray           # shape (len(eval_times), n)
    y_end: np.ndarray
    stats: IntegratorStats = field(default_factory=IntegratorStats)
    h_last: float = 0.0          # last accepted step size (resume hint)


def _initial_step(rhs, t_a, y0, f0, rtol, atol, span):
    """Hairer-Norsett-Wanner automatic initial step selection (one extra
    RHS evaluation). Uses the same scaled max norm as the error control."""
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)

    f1 = rhs(t_a + h0, y0 + h0 * f0)
    d2 = float(np.max(np.abs(f1 - f0) / scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray],
              y0,
              t_a: float,
              t_b: float,
              eval_times=(),
              opts: OdeOptions = OdeOptions()) -> IntegrationResult:
    """Integrate y' = rhs(t, y) from t_a to t_b.

    ``eval_times`` must be sorted and lie within [t_a, t_b]; states there are
    reported from the quartic dense interpolant of the surrounding step.

    Raises StiffnessError on step underflow, BudgetError past
    ``opts.max_steps`` attempts, NumericsError when the state stops being
    finite.
    """
    if not t_b > t_a:
        raise TimingError(f"need t_b > t_a, got [{t_a}, {t_b}]")
    ev = np.asarray(eval_times, dtype=float)
    if ev.ndim != 1:
        raise ValidationError("eval_times must be one-dimensional")
    if ev.size and (np.any(np.diff(ev) < 0) or ev[0] < t_a or ev[-1] > t_b):
        raise ValidationError("eval_times must be sorted and within [t_a, t_b]")

    y = np.array(y0, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(y.view(np.float64))):
        raise NumericsError("initial state contains non-finite entries")
    n = y.size
    span = t_b - t_a
    max_step = opts.max_step if opts.max_step is not None else span

    stats = IntegratorStats()
    out = np.empty((ev.size, n), dtype=np.complex128)
    ptr = 0
    while ptr < ev.size and ev[ptr] <= t_a:
        out[ptr] = y
        ptr += 1

    rk_combine = _kernels.rk_combine
    error_norm = _kernels.error_norm
    a_rows = _A
    c_nodes = _C
    rtol, atol = opts.rtol, opts.atol
    max_steps = opts.max_steps
    m = ev.size
    h_floor = _UNDERFLOW * span

    k = np.empty((7, n), dtype=np.complex128)
    k[0] = rhs(t_a, y)
    n_evals = 1

    if opts.initial_step is not None:
        h = opts.initial_step
    else:
        h = _initial_step(rhs, t_a, y, k[0], rtol, atol, span)
        n_evals += 1
    h = min(h, max_step, span)

    accepted = 0
    rejected = 0
    h_accepted = 0.0
    t = t_a
    while t < t_b:
        if accepted + rejected >= max_steps:
            raise BudgetError(f"exceeded max_steps={max_steps} at t={t}")
        if h < h_floor:
            raise StiffnessError(f"step size underflow (h={h:.3e}) at t={t}; problem too stiff")

        hit_end = t + h >= t_b
        h_eff = t_b - t if hit_end else h

        for s in range(1, 7):
            y_stage = rk_combine(y, k, a_rows[s - 1], h_eff)
            k[s] = rhs(t + c_nodes[s] * h_eff, y_stage)
        n_evals += 6
        y1 = y_stage  # stage 7 coefficients are the 5th-order weights (FSAL)

        err = error_norm(k, _E, h_eff, y, y1, atol, rtol)
        if not math.isfinite(err):
            raise NumericsError(f"non-finite state during step at t={t}")

        if err <= 1.0:
            t_new = t_b if hit_end else t + h_eff
            if ptr < m and ev[ptr] <= t_new:
                q = None
                while ptr < m and ev[ptr] <= t_new:
                    if ev[ptr] >= t_new:
                        out[ptr] = y1
                    else:
                        if q is None:
                            q = k.T @ _P
                        theta = (ev[ptr] - t) / h_eff
                        tv = np.array([theta, theta**2, theta**3, theta**4])
                        out[ptr] = y + h_eff * (q @ tv)
                    ptr += 1
            y = y1.copy()
            k[0] = k[6]
            t = t_new
            accepted += 1
            if not hit_end:
                # resume hint: the endpoint-clamped step is artificially short
                h_accepted = h_eff
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))
            h = min(h_eff * factor, max_step)
        else:
            rejected += 1
            h = h_eff * max(_MIN_FACTOR, _SAFETY * err ** -0.2)

    while ptr < m:  # times equal to t_b up to float representation
        out[ptr] = y
        ptr += 1

    stats.steps_accepted = accepted
    stats.steps_rejected = rejected
    stats.rhs_evals = n_evals
    return IntegrationResult(out, y, stats, h_last=h_accepted)
