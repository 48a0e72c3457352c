"""Pulse-sequence time evolution for closed and open quantum systems.

Build pulses from recipes, collect them into a sequence, and evolve with
either the segmented engine (the window is split at pulse boundaries so
each solver call sees only active pulses) or the naive baseline engine
(every pulse's activity is inspected at every RHS evaluation).
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .errors import (
    BudgetError,
    DimensionError,
    KindError,
    NumericsError,
    ParamError,
    ParseError,
    PulseSimError,
    StiffnessError,
    TimingError,
    UnknownNameError,
    ValidationError,
    WindowError,
)
from .operators import (
    QuantumState,
    StateKind,
    as_operator,
    dagger,
    density,
    expect,
    identity,
    ket,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
    to_density,
)
from .pulses import (
    Constant,
    Envelope,
    Gaussian,
    NativeCallback,
    Pulse,
    PulseRecipe,
    PulseSequence,
    Sinusoid,
    SmoothedSquare,
    TabulatedSamples,
    make_pulse,
    pulse_hamiltonian_at,
    total_hamiltonian_at,
)
from .segmentation import Segment, SegmentPlan, segment_hamiltonian, segmentize
from .integrator import IntegrationResult, OdeOptions, integrate
from .evolver import (
    Engine,
    EngineStats,
    EvolveResult,
    EvolveSpec,
    evolve,
    evolve_compare,
    lindblad_rhs,
    schrodinger_rhs,
)
from .sequence_io import emit_sequence_file, parse_sequence_file

__all__ = [
    "__version__",
    "backend_name",
    # errors
    "PulseSimError", "DimensionError", "KindError", "ParamError", "TimingError",
    "WindowError", "StiffnessError", "BudgetError", "NumericsError",
    "ParseError", "UnknownNameError", "ValidationError",
    # operators & states
    "QuantumState", "StateKind", "as_operator", "dagger", "density", "expect",
    "identity", "ket", "sigma_minus", "sigma_plus", "sigma_x", "sigma_y",
    "sigma_z", "to_density",
    # pulse model
    "Envelope", "Constant", "Sinusoid", "Gaussian", "SmoothedSquare",
    "TabulatedSamples", "NativeCallback", "PulseRecipe", "Pulse",
    "PulseSequence", "make_pulse", "pulse_hamiltonian_at", "total_hamiltonian_at",
    # segmentation
    "Segment", "SegmentPlan", "segmentize", "segment_hamiltonian",
    # integrator
    "OdeOptions", "IntegrationResult", "integrate",
    # evolver
    "Engine", "EngineStats", "EvolveSpec", "EvolveResult", "evolve",
    "evolve_compare", "schrodinger_rhs", "lindblad_rhs",
    # io
    "parse_sequence_file", "emit_sequence_file",
]
