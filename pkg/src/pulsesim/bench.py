"""Wall-clock scaling benchmark: segmented vs naive engine.

For each (engine, n, tau) cell a deterministic synthetic sequence of n
equal, non-overlapping sinusoid pulses evenly spaced over duration tau is
evolved ``repeats`` times (one discarded warm-up first); the mean and
standard deviation of the wall-clock time around the evolve call go into a
raw CSV, and per-(engine, n) least-squares slopes of time vs tau go into a
slopes CSV. The interesting shape: naive slopes grow linearly with n, while
segmented slopes stay roughly flat.
"""

from __future__ import annotations

import csv
import gc
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NUMERICAL_ERRORS, ValidationError
from .evolver import Engine, EvolveSpec, evolve
from .integrator import OdeOptions
from .operators import QuantumState, StateKind
from .pulses import PulseRecipe, PulseSequence, Pulse, Sinusoid

# Fixed synthetic-model scales. The static level splitting sets the natural
# adaptive step (~1/omega); it is chosen so that steps stay much shorter
# than the smallest segment across the default tau grid, keeping the
# segmented engine's per-step cost independent of n.
OMEGA_0 = 2 * math.pi * 8.0
DRIVE_AMP = 2 * math.pi * 2.0
DUTY_CYCLE = 0.55

DEFAULT_N = (5, 10, 20, 50)
DEFAULT_TAU = (4.0, 6.0, 8.0, 10.0, 12.0)


@dataclass(frozen=True)
class BenchConfig:
    n_values: tuple[int, ...] = DEFAULT_N
    tau_values: tuple[float, ...] = DEFAULT_TAU
    repeats: int = 20
    dim: int = 2
    seed: int = 0          # accepted for CLI symmetry; the generator is deterministic
    eval_points: int = 25
    rtol: float = 1e-8
    atol: float = 1e-10
    parallel_cells: bool = False

    def __post_init__(self):
        if len(self.n_values) < 1 or any(n < 1 for n in self.n_values):
            raise ValidationError("bench needs at least one n value, all >= 1")
        if self.repeats < 3:
            raise ValidationError(f"bench needs repeats >= 3, got {self.repeats}")
        if len(self.tau_values) < 2:
            raise ValidationError("bench needs at least two tau values to fit a slope")
        if self.dim < 2:
            raise ValidationError(f"bench dim must be >= 2, got {self.dim}")


@dataclass
class CellResult:
    engine: str
    n: int
    tau: float
    repeats: int
    mean_s: float
    std_s: float
    status: str = "ok"


@dataclass
class SlopeFit:
    engine: str
    n: int
    slope: float
    stderr: float
    intercept: float


def synthetic_sequence(n: int, tau: float, dim: int = 2) -> PulseSequence:
    """n equal sinusoid pulses at duty cycle 0.55, evenly spaced over [0, tau],
    on a fixed ladder system with a diagonal static Hamiltonian."""
    static = OMEGA_0 * np.diag(np.arange(dim)).astype(np.complex128)
    coupling = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim - 1):
        coupling[i, i + 1] = 0.5
        coupling[i + 1, i] = 0.5
    recipe = PulseRecipe(coupling, Sinusoid(), defaults={"phase": 0.0})
    slot = tau / n
    pulses = tuple(
        Pulse(recipe, {"amp": DRIVE_AMP, "omega": OMEGA_0}, start=k * slot,
              duration=DUTY_CYCLE * slot)
        for k in range(n)
    )
    return PulseSequence(pulses, static, dim)


def _bench_spec(engine: str, n: int, tau: float, cfg: BenchConfig) -> EvolveSpec:
    seq = synthetic_sequence(n, tau, cfg.dim)
    psi0 = np.zeros(cfg.dim, dtype=np.complex128)
    psi0[0] = 1.0
    initial = QuantumState(StateKind.KET, psi0)
    times = np.linspace(0.0, tau, cfg.eval_points)
    return EvolveSpec(
        seq, initial, times,
        ode=OdeOptions(rtol=cfg.rtol, atol=cfg.atol),
        engine=Engine(engine),
    )


def _time_cell(args) -> CellResult:
    engine, n, tau, cfg = args
    spec = _bench_spec(engine, n, tau, cfg)
    try:
        evolve(spec)  # warm-up, discarded (also absorbs JIT compilation)
        samples = []
        gc.collect()
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            for _ in range(cfg.repeats):
                t0 = time.perf_counter()
                evolve(spec)
                samples.append(time.perf_counter() - t0)
        finally:
            if gc_was_enabled:
                gc.enable()
    except NUMERICAL_ERRORS as e:
        return CellResult(engine, n, tau, cfg.repeats, math.nan, math.nan,
                          status=type(e).__name__)
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1))
    return CellResult(engine, n, tau, cfg.repeats, mean, std)


def _cell_grid(cfg: BenchConfig):
    return [
        (engine.value, n, tau)
        for engine in (Engine.NAIVE, Engine.SEGMENTED)
        for n in cfg.n_values
        for tau in cfg.tau_values
    ]


def run_bench(cfg: BenchConfig) -> list[CellResult]:
    """Time every (engine, n, tau) cell; failed cells carry their reason in
    ``status`` and NaN timings.

    Sequential runs visit the cells round-robin (one repeat of every cell
    per sweep) so slow machine-load drift hits all cells alike instead of
    biasing whichever cell was being timed when it happened.
    """
    cells = _cell_grid(cfg)
    if cfg.parallel_cells:
        # Warning: concurrent cells share cores and contaminate wall-clock
        # timings; acceptable for smoke runs only.
        with ProcessPoolExecutor() as pool:
            return list(pool.map(_time_cell, [c + (cfg,) for c in cells]))

    specs = []
    samples: list[list[float]] = []
    status = ["ok"] * len(cells)
    for engine, n, tau in cells:
        specs.append(_bench_spec(engine, n, tau, cfg))
        samples.append([])

    for i, spec in enumerate(specs):  # warm-up sweep, also absorbs JIT
        try:
            evolve(spec)
        except NUMERICAL_ERRORS as e:
            status[i] = type(e).__name__

    # visit order is re-shuffled each sweep (seeded, so still deterministic):
    # load drift then averages out across cells instead of biasing whichever
    # cells share a position in the sweep
    order_rng = np.random.default_rng(cfg.seed)
    order = np.arange(len(cells))

    gc.collect()
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(cfg.repeats):
            order_rng.shuffle(order)
            for i in order:
                if status[i] != "ok":
                    continue
                spec = specs[i]
                t0 = time.perf_counter()
                try:
                    evolve(spec)
                except NUMERICAL_ERRORS as e:
                    status[i] = type(e).__name__
                    continue
                samples[i].append(time.perf_counter() - t0)
    finally:
        if gc_was_enabled:
            gc.enable()

    rows = []
    for i, (engine, n, tau) in enumerate(cells):
        if status[i] != "ok":
            rows.append(CellResult(engine, n, tau, cfg.repeats, math.nan, math.nan, status[i]))
        else:
            rows.append(CellResult(
                engine, n, tau, cfg.repeats,
                float(np.mean(samples[i])), float(np.std(samples[i], ddof=1)),
            ))
    return rows


def fit_slopes(rows: list[CellResult]) -> list[SlopeFit]:
    """Least-squares slope of mean time vs tau per (engine, n) group."""
    groups: dict[tuple[str, int], list[CellResult]] = {}
    for r in rows:
        if r.status == "ok" and math.isfinite(r.mean_s):
            groups.setdefault((r.engine, r.n), []).append(r)
    fits = []
    for (engine, n), cells in groups.items():
        if len(cells) < 2:
            continue
        x = np.array([c.tau for c in cells])
        y = np.array([c.mean_s for c in cells])
        xc = x - x.mean()
        sxx = float(np.sum(xc * xc))
        slope = float(np.sum(xc * (y - y.mean())) / sxx)
        intercept = float(y.mean() - slope * x.mean())
        resid = y - (intercept + slope * x)
        dof = len(cells) - 2
        stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if dof > 0 else math.nan
        fits.append(SlopeFit(engine, n, slope, stderr, intercept))
    fits.sort(key=lambda f: (f.engine, f.n))
    return fits


RAW_FIELDS = ("engine", "n", "tau", "repeats", "mean_s", "std_s", "status")
SLOPE_FIELDS = ("engine", "n", "slope", "stderr", "intercept")


def write_raw_csv(rows: list[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RAW_FIELDS)
        for r in rows:
            w.writerow([r.engine, r.n, repr(r.tau), r.repeats,
                        repr(r.mean_s), repr(r.std_s), r.status])


def read_raw_csv(path) -> list[CellResult]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(RAW_FIELDS) - set(reader.fieldnames):
            raise ValidationError(f"{path}: not a bench raw CSV (expected columns {RAW_FIELDS})")
        for rec in reader:
            rows.append(CellResult(
                engine=rec["engine"], n=int(rec["n"]), tau=float(rec["tau"]),
                repeats=int(rec["repeats"]), mean_s=float(rec["mean_s"]),
                std_s=float(rec["std_s"]), status=rec["status"],
            ))
    return rows


def write_slopes_csv(fits: list[SlopeFit], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SLOPE_FIELDS)
        for f in fits:
            w.writerow([f.engine, f.n, repr(f.slope), repr(f.stderr), repr(f.intercept)])


def pearson(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.sum(xc * yc) / np.sqrt(np.sum(xc * xc) * np.sum(yc * yc)))


def spearman(x, y) -> float:
    def ranks(v):
        order = np.argsort(v)
        r = np.empty(len(v))
        r[order] = np.arange(len(v), dtype=float)
        return r

    return pearson(ranks(np.asarray(x, float)), ranks(np.asarray(y, float)))
