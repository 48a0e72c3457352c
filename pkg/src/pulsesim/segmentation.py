"""Partition an evolution window into segments of constant active-pulse set.

Segment breaks are placed at every pulse start and end inside the window, so
each solver call only ever sees the pulses that are actually on. For n
non-overlapping pulses separated by gaps this yields the 2n-1 segments of
the classic layout; overlapping pulses just produce more break points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import TimingError, ValidationError
from .pulses import PulseSequence

#: Boundaries closer than this (seconds, absolute) collapse into one break.
#: Keeps degenerate near-zero segments from stalling the adaptive stepper.
DEFAULT_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """Half-open interval [t_a, t_b) with the indices of the pulses active
    throughout it."""

    t_a: float
    t_b: float
    active: tuple[int, ...]

    @property
    def length(self) -> float:
        return self.t_b - self.t_a


@dataclass(frozen=True)
class SegmentPlan:
    """Segments tiling [t_0, t_1) in order, adjacent active sets distinct."""

    segments: tuple[Segment, ...]
    t_0: float
    t_1: float
    merge_tol: float = DEFAULT_MERGE_TOL

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


def segmentize(seq: PulseSequence, t_0: float, t_1: float,
               merge_tol: float = DEFAULT_MERGE_TOL) -> SegmentPlan:
    """Split [t_0, t_1] at pulse boundaries into maximal constant-activity
    segments.

    Pulse starts/ends strictly inside the window become breaks; boundaries
    closer than ``merge_tol`` collapse. Each segment's active set is decided
    at its midpoint (immune to the half-open boundary ambiguity), and
    adjacent segments with identical active sets are merged. Segments with
    no active pulse are kept: the static Hamiltonian or free evolution still
    applies there.
    """
    if not t_1 > t_0:
        raise TimingError(f"need t_1 > t_0, got [{t_0}, {t_1}]")
    if merge_tol < 0:
        raise ValidationError(f"merge_tol must be >= 0, got {merge_tol}")

    cuts = []
    for p in seq.pulses:
        for edge in (p.start, p.end):
            if t_0 + merge_tol < edge < t_1 - merge_tol:
                cuts.append(edge)
    cuts.sort()

    boundaries = [t_0]
    for c in cuts:
        if c - boundaries[-1] > merge_tol:
            boundaries.append(c)
    if t_1 - boundaries[-1] <= merge_tol:
        boundaries.pop()
    boundaries.append(t_1)

    pulses = seq.pulses
    segments: list[Segment] = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        mid = 0.5 * (a + b)
        active = tuple(i for i, p in enumerate(pulses) if p.active_at(mid))
        if segments and segments[-1].active == active:
            prev = segments.pop()
            segments.append(Segment(prev.t_a, b, active))
        else:
            segments.append(Segment(a, b, active))

    return SegmentPlan(tuple(segments), t_0, t_1, merge_tol)


def segment_hamiltonian(seq: PulseSequence, segment: Segment) -> Callable[[float], np.ndarray]:
    """Time-dependent Hamiltonian closure for one segment.

    The returned ``H(t)`` touches only the segment's active pulses and
    performs no activity checks; it is valid for t in [t_a, t_b] (envelopes
    are evaluated by their formulas, so the closed right endpoint yields the
    one-sided limit the integrator needs).
    """
    dim = seq.dim
    terms = [
        (seq.pulses[i].bound_envelope(), seq.pulses[i].recipe.operator)
        for i in segment.active
    ]
    static = seq.static_hamiltonian

    if not terms:
        h_const = static.copy() if static is not None else np.zeros((dim, dim), np.complex128)
        h_const.setflags(write=False)
        return lambda t: h_const

    def h_of_t(t: float) -> np.ndarray:
        if static is not None:
            h = static.copy()
        else:
            h = np.zeros((dim, dim), np.complex128)
        for f, op in terms:
            h += f(t) * op
        return h

    return h_of_t
