"""Command-line interface: run, plan, bench, fit.

Exit codes: 0 success, 2 I/O failure, 3 invalid input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import __version__
from ._kernels import backend_name
from .bench import BenchConfig, fit_slopes, read_raw_csv, run_bench, write_raw_csv, write_slopes_csv
from .errors import NUMERICAL_ERRORS, VALIDATION_ERRORS
from .evolver import Engine, evolve
from .segmentation import segmentize
from .sequence_io import parse_sequence_file, write_result_csv

EXIT_OK = 0
EXIT_IO = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4


def _read_text(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _apply_overrides(spec, args):
    updates = {}
    if getattr(args, "engine", None):
        updates["engine"] = Engine(args.engine)
    ode_updates = {}
    if getattr(args, "rtol", None) is not None:
        ode_updates["rtol"] = args.rtol
    if getattr(args, "atol", None) is not None:
        ode_updates["atol"] = args.atol
    if ode_updates:
        updates["ode"] = dataclasses.replace(spec.ode, **ode_updates)
    return dataclasses.replace(spec, **updates) if updates else spec


def _cmd_run(args) -> int:
    spec = _apply_overrides(parse_sequence_file(_read_text(args.input)), args)
    result = evolve(spec)
    write_result_csv(result, args.output, __version__)
    s = result.stats
    print(
        f"engine={s.engine} segments={s.n_segments} rhs_evals={s.rhs_evals} "
        f"env_evals={s.env_evals} backend={s.backend} "
        f"wall_time_s={s.wall_time_s:.6f} -> {args.output}"
    )
    return EXIT_OK


def _cmd_plan(args) -> int:
    text = _read_text(args.input)
    spec = parse_sequence_file(text)
    doc = json.loads(text)
    recipe_of = [p.get("recipe", "?") for p in doc.get("pulses", [])]
    plan = segmentize(spec.sequence, float(spec.times[0]), float(spec.times[-1]))
    print(f"{len(spec.sequence.pulses)} pulses / {len(plan)} segments")
    for seg in plan:
        if seg.active:
            label = ",".join(f"p{i}[{recipe_of[i]}]" for i in seg.active)
        else:
            label = "-"
        print(f"{seg.t_a:.12g}  {seg.t_b:.12g}  {label}")
    return EXIT_OK


def _parse_list(text: str, cast, what: str):
    try:
        return tuple(cast(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad {what} list: {text!r}") from None


def _cmd_bench(args) -> int:
    cfg = BenchConfig(
        n_values=args.n,
        tau_values=args.tau,
        repeats=args.repeats,
        dim=args.dim,
        seed=args.seed,
        rtol=args.rtol if args.rtol is not None else 1e-8,
        atol=args.atol if args.atol is not None else 1e-10,
        parallel_cells=args.parallel_cells,
    )
    rows = run_bench(cfg)
    if all(r.status != "ok" for r in rows):
        print("bench: every cell failed", file=sys.stderr)
        for r in rows:
            print(f"  {r.engine} n={r.n} tau={r.tau}: {r.status}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_raw_csv(rows, args.output)
    slopes_path = args.output.rsplit(".", 1)[0] + ".slopes.csv"
    fits = fit_slopes(rows)
    write_slopes_csv(fits, slopes_path)
    print(f"wrote {len(rows)} cells -> {args.output}")
    print(f"wrote {len(fits)} slope fits -> {slopes_path}")
    for f in fits:
        print(f"  {f.engine:<9} n={f.n:<3} slope={f.slope:.6g} s/s  stderr={f.stderr:.2g}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    rows = read_raw_csv(args.input)
    fits = fit_slopes(rows)
    if args.output:
        write_slopes_csv(fits, args.output)
        print(f"wrote {len(fits)} slope fits -> {args.output}")
    else:
        print(",".join(("engine", "n", "slope", "stderr", "intercept")))
        for f in fits:
            print(f"{f.engine},{f.n},{f.slope!r},{f.stderr!r},{f.intercept!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsesim",
        description="Pulse-sequence time evolution (segmented and naive engines).",
    )
    parser.add_argument("--version", action="version",
                        version=f"pulsesim {__version__} (backend: {backend_name()})")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evolve a sequence file, write a result CSV")
    run.add_argument("--input", "-i", required=True)
    run.add_argument("--output", "-o", required=True)
    run.add_argument("--engine", choices=[e.value for e in Engine])
    run.add_argument("--rtol", type=float)
    run.add_argument("--atol", type=float)
    run.set_defaults(fn=_cmd_run)

    plan = sub.add_parser("plan", help="print the segment plan of a sequence file")
    plan.add_argument("--input", "-i", required=True)
    plan.set_defaults(fn=_cmd_plan)

    bench = sub.add_parser("bench", help="wall-clock scaling benchmark over (n, tau)")
    bench.add_argument("--n", type=lambda s: _parse_list(s, int, "n"),
                       default=BenchConfig.n_values, help="comma-separated pulse counts")
    bench.add_argument("--tau", type=lambda s: _parse_list(s, float, "tau"),
                       default=BenchConfig.tau_values, help="comma-separated durations (s)")
    bench.add_argument("--repeats", type=int, default=20)
    bench.add_argument("--dim", type=int, default=2)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--rtol", type=float)
    bench.add_argument("--atol", type=float)
    bench.add_argument("--output", "-o", required=True, help="raw CSV path; slopes go to *.slopes.csv")
    bench.add_argument("--parallel-cells", action="store_true",
                       help="time cells concurrently (contaminates wall-clock timing)")
    bench.set_defaults(fn=_cmd_bench)

    fit = sub.add_parser("fit", help="recompute slopes from an existing raw CSV")
    fit.add_argument("--input", "-i", required=True)
    fit.add_argument("--output", "-o")
    fit.set_defaults(fn=_cmd_fit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as e:
        print(f"pulsesim: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except VALIDATION_ERRORS as e:
        print(f"pulsesim: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NUMERICAL_ERRORS as e:
        print(f"pulsesim: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
