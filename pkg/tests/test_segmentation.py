import numpy as np
import pytest

import pulsesim as ps
from pulsesim.errors import TimingError

from conftest import rand_herm, rand_pulse


def constant_pulse(start, duration, amp=1.0):
    r = ps.PulseRecipe(ps.sigma_x(), ps.Constant())
    return ps.make_pulse(r, {"amp": amp}, start, duration)


def spaced_sequence(n, duration=1.0, gap=1.0):
    pulses = tuple(constant_pulse(i * (duration + gap), duration) for i in range(n))
    return ps.PulseSequence(pulses)


def brute_force_segments(seq, t0, t1, samples=20001):
    """Independent reference: scan the active set on midpoints of a fine
    grid and record change points. Grid resolution bounds the boundary
    placement error."""
    ts = np.linspace(t0, t1, samples)
    mids = (ts[:-1] + ts[1:]) / 2
    active = [tuple(i for i, p in enumerate(seq.pulses) if p.active_at(t)) for t in mids]
    segs = []
    seg_start = t0
    for i in range(1, len(mids)):
        if active[i] != active[i - 1]:
            segs.append((seg_start, ts[i], active[i - 1]))
            seg_start = ts[i]
    segs.append((seg_start, t1, active[-1]))
    return segs


def test_three_spaced_pulses_five_segments():
    # the canonical layout: three pulses with gaps -> 2n-1 = 5 segments
    seq = spaced_sequence(3)
    plan = ps.segmentize(seq, 0.0, 5.0)
    assert len(plan) == 5
    assert [s.active for s in plan] == [(0,), (), (1,), (), (2,)]


def test_single_pulse_spanning_window():
    seq = ps.PulseSequence((constant_pulse(0.0, 3.0),))
    plan = ps.segmentize(seq, 0.0, 3.0)
    assert len(plan) == 1
    assert plan.segments[0].active == (0,)


def test_overlapping_pair_example():
    # P1 on [0,2), P2 on [1,3), window [0,3]:
    # boundary times {0,1,2,3}, midpoint membership fixes the active sets
    seq = ps.PulseSequence((constant_pulse(0.0, 2.0), constant_pulse(1.0, 2.0)))
    plan = ps.segmentize(seq, 0.0, 3.0)
    expected = [(0.0, 1.0, (0,)), (1.0, 2.0, (0, 1)), (2.0, 3.0, (1,))]
    assert [(s.t_a, s.t_b, s.active) for s in plan] == expected
    # cross-check against the brute-force scan
    brute = brute_force_segments(seq, 0.0, 3.0)
    assert len(brute) == len(plan.segments)
    for (ba, bb, bact), seg in zip(brute, plan.segments):
        assert bact == seg.active
        assert abs(ba - seg.t_a) < 1e-3 and abs(bb - seg.t_b) < 1e-3


def test_count_law_2n_minus_1():
    for n in range(1, 51):
        seq = spaced_sequence(n)
        t1 = (n - 1) * 2.0 + 1.0
        plan = ps.segmentize(seq, 0.0, t1)
        assert len(plan) == 2 * n - 1, f"n={n}"


def test_tiling_random_sequences(rng):
    for _ in range(25):
        n = int(rng.integers(1, 51))
        pulses = tuple(rand_pulse(rng, 2) for _ in range(n))
        seq = ps.PulseSequence(pulses)
        plan = ps.segmentize(seq, 0.0, 2.0)
        assert plan.segments[0].t_a == 0.0
        assert plan.segments[-1].t_b == 2.0
        for a, b in zip(plan.segments[:-1], plan.segments[1:]):
            assert a.t_b == b.t_a  # no gaps, no overlaps
            assert a.active != b.active  # maximal segments
        for s in plan.segments:
            assert s.t_b > s.t_a


def test_segment_hamiltonian_matches_oracle(rng):
    for _ in range(10):
        pulses = tuple(rand_pulse(rng, 3) for _ in range(5))
        seq = ps.PulseSequence(pulses, rand_herm(rng, 3))
        plan = ps.segmentize(seq, 0.0, 2.0)
        for seg in plan:
            h_seg = ps.segment_hamiltonian(seq, seg)
            lo = seg.t_a + 2 * plan.merge_tol
            hi = seg.t_b - 2 * plan.merge_tol
            for t in rng.uniform(lo, hi, size=12):
                diff = np.max(np.abs(h_seg(t) - ps.total_hamiltonian_at(seq, t)))
                assert diff <= 1e-14


def test_segment_hamiltonian_empty_active_static():
    seq = ps.PulseSequence((constant_pulse(5.0, 1.0),), 2.0 * ps.sigma_z())
    plan = ps.segmentize(seq, 0.0, 1.0)
    assert len(plan) == 1 and plan.segments[0].active == ()
    h = ps.segment_hamiltonian(seq, plan.segments[0])
    assert np.array_equal(h(0.3), 2.0 * ps.sigma_z())


def test_segment_hamiltonian_empty_active_no_static():
    seq = ps.PulseSequence((constant_pulse(5.0, 1.0),))
    plan = ps.segmentize(seq, 0.0, 1.0)
    h = ps.segment_hamiltonian(seq, plan.segments[0])
    assert np.array_equal(h(0.5), np.zeros((2, 2)))


def test_pulses_outside_window_never_active(rng):
    inside = constant_pulse(1.0, 1.0)
    before = constant_pulse(-5.0, 1.0)
    after = constant_pulse(10.0, 1.0)
    seq = ps.PulseSequence((before, inside, after))
    plan = ps.segmentize(seq, 0.0, 3.0)
    for seg in plan:
        assert 0 not in seg.active and 2 not in seg.active


def test_partial_window_overlap_clips():
    # pulse [1, 4) against window [0, 2]: only its start creates a break
    seq = ps.PulseSequence((constant_pulse(1.0, 3.0),))
    plan = ps.segmentize(seq, 0.0, 2.0)
    assert [(s.t_a, s.t_b, s.active) for s in plan] == [(0.0, 1.0, ()), (1.0, 2.0, (0,))]


def test_merge_tolerance_collapses_near_boundaries():
    a = constant_pulse(0.0, 1.0)
    b = constant_pulse(1.0 + 1e-14, 1.0 - 1e-14)  # starts within tol of a's end
    seq = ps.PulseSequence((a, b))
    plan = ps.segmentize(seq, 0.0, 2.0)
    assert len(plan) == 2
    lengths = [s.length for s in plan]
    assert min(lengths) > 1e-12


def test_adjacent_identical_active_sets_merge():
    # two pulses back to back with no gap: boundary between them separates
    # {0} from {1}, so no merge; but a pulse ending exactly at the window end
    # with another covering everything gives identical neighbours
    cover = constant_pulse(0.0, 2.0)
    seq = ps.PulseSequence((cover, constant_pulse(5.0, 1.0)))
    plan = ps.segmentize(seq, 0.0, 2.0)
    assert len(plan) == 1


def test_segmentize_rejects_bad_window():
    seq = ps.PulseSequence((constant_pulse(0.0, 1.0),))
    with pytest.raises(TimingError):
        ps.segmentize(seq, 1.0, 1.0)
