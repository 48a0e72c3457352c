"""Declarative sequence files (JSON) and result CSV serialization.

A sequence file describes one evolution run: dimension, operators, pulse
recipes, pulses, optional static Hamiltonian, initial state, evaluation
times, optional collapse/expectation operators, ODE options, and engine.
Complex numbers are written as ``[re, im]`` pairs throughout. Operators may
be literal matrices or expressions over named operators: builtins ``sx sy
sz sm sp id`` (dim 2), Kronecker products (``sx⊗id`` or ``kron(sx, id)``),
real scalar multiples, and sums.
"""

from __future__ import annotations

import json
import re
from typing import Any

import numpy as np

from .errors import (
    ParseError,
    PulseSimError,
    UnknownNameError,
    ValidationError,
)
from .evolver import Engine, EvolveResult, EvolveSpec
from .integrator import OdeOptions
from .operators import BUILTIN_OPERATORS, QuantumState, StateKind, density, ket
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
)

_ENVELOPE_KINDS = {
    "constant": Constant,
    "sinusoid": Sinusoid,
    "gaussian": Gaussian,
    "smoothed_square": SmoothedSquare,
}

_TOP_LEVEL_KEYS = {
    "dim", "operators", "recipes", "pulses", "static_hamiltonian",
    "initial_state", "times", "collapse_ops", "e_ops", "ode", "engine",
}


# ---------------------------------------------------------------------------
# complex literals
# ---------------------------------------------------------------------------

def _complex_entry(v, where: str) -> complex:
    if (not isinstance(v, list)) or len(v) != 2 \
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ValidationError(f"{where}: complex entries must be [re, im] number pairs, got {v!r}")
    return complex(v[0], v[1])


def _matrix_literal(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValidationError(f"{where}: matrix literal must be a list of rows")
    n = len(rows)
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValidationError(f"{where}: matrix must be square, row {i} has {len(row)} entries for {n} rows")
        for j, v in enumerate(row):
            out[i, j] = _complex_entry(v, f"{where}[{i}][{j}]")
    return out


def _vector_literal(entries, where: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{where}: expected a nonempty list of [re, im] pairs")
    return np.array([_complex_entry(v, f"{where}[{i}]") for i, v in enumerate(entries)])


# ---------------------------------------------------------------------------
# operator expressions
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym>[+\-*(),⊗]))"
)


def _tokenize(text: str, where: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ValidationError(f"{where}: cannot parse operator expression at ...{text[pos:pos+12]!r}")
        if m.lastgroup == "number":
            tokens.append(("num", float(m.group("number"))))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("sym", m.group("sym")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _ExprParser:
    """Recursive-descent parser: sums of scalar-multiplied Kronecker chains."""

    def __init__(self, tokens, lookup, where):
        self.toks = tokens
        self.i = 0
        self.lookup = lookup
        self.where = where

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym):
        kind, val = self.next()
        if kind != "sym" or val != sym:
            raise ValidationError(f"{self.where}: expected {sym!r} in operator expression")

    def parse(self) -> np.ndarray:
        out = self.expr()
        if self.peek()[0] != "end":
            raise ValidationError(f"{self.where}: trailing tokens in operator expression")
        return out

    def expr(self) -> np.ndarray:
        sign = 1.0
        if self.peek() == ("sym", "-"):
            self.next()
            sign = -1.0
        acc = sign * self.term()
        while self.peek()[0] == "sym" and self.peek()[1] in "+-":
            op = self.next()[1]
            rhs = self.term()
            if rhs.shape != acc.shape:
                raise ValidationError(f"{self.where}: cannot add operators of shapes {acc.shape} and {rhs.shape}")
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> np.ndarray:
        if self.peek()[0] == "num":
            scalar = self.next()[1]
            self.expect_sym("*")
            return scalar * self.kron_chain()
        return self.kron_chain()

    def kron_chain(self) -> np.ndarray:
        acc = self.atom()
        while self.peek() == ("sym", "⊗"):
            self.next()
            acc = np.kron(acc, self.atom())
        return acc

    def atom(self) -> np.ndarray:
        kind, val = self.next()
        if kind == "name":
            if val == "kron" and self.peek() == ("sym", "("):
                self.next()
                a = self.expr()
                self.expect_sym(",")
                b = self.expr()
                self.expect_sym(")")
                return np.kron(a, b)
            return self.lookup(val)
        if kind == "sym" and val == "(":
            inner = self.expr()
            self.expect_sym(")")
            return inner
        raise ValidationError(f"{self.where}: unexpected token {val!r} in operator expression")


class _OperatorTable:
    """Named operators with lazy resolution and cycle detection."""

    def __init__(self, raw: dict[str, Any]):
        self.raw = raw
        self.cache: dict[str, np.ndarray] = {}
        self.resolving: list[str] = []
        for name in raw:
            if name in BUILTIN_OPERATORS:
                raise ValidationError(f"operators.{name}: shadows the builtin operator {name!r}")
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValidationError(f"operators.{name}: not a valid operator name")

    def lookup(self, name: str) -> np.ndarray:
        if name in BUILTIN_OPERATORS:
            return np.asarray(BUILTIN_OPERATORS[name])
        if name in self.cache:
            return self.cache[name]
        if name not in self.raw:
            raise UnknownNameError(f"unknown operator name {name!r}")
        if name in self.resolving:
            chain = " -> ".join(self.resolving + [name])
            raise ValidationError(f"operators.{name}: definition cycle ({chain})")
        self.resolving.append(name)
        try:
            value = self.resolve(self.raw[name], f"operators.{name}")
        finally:
            self.resolving.pop()
        self.cache[name] = value
        return value

    def resolve(self, value, where: str) -> np.ndarray:
        if isinstance(value, str):
            return _ExprParser(_tokenize(value, where), self.lookup, where).parse()
        if isinstance(value, list):
            return _matrix_literal(value, where)
        raise ValidationError(f"{where}: expected an expression string or a matrix literal")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _require(doc: dict, key: str, where: str = "") -> Any:
    if key not in doc:
        raise ValidationError(f"missing required field {where + key!r}")
    return doc[key]


def _number(v, where: str) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _parse_envelope(doc, where: str) -> Envelope:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError(f"{where}: envelope must be an object with a 'kind'")
    kind = doc["kind"]
    if kind == "tabulated":
        samples = doc.get("samples")
        if not isinstance(samples, list) or not all(isinstance(s, list) and len(s) == 2 for s in samples):
            raise ValidationError(f"{where}.samples: expected a list of [t, f] pairs")
        extra = set(doc) - {"kind", "samples"}
        if extra:
            raise ValidationError(f"{where}: unexpected envelope fields {sorted(extra)}")
        try:
            return TabulatedSamples([s[0] for s in samples], [s[1] for s in samples])
        except PulseSimError as e:
            raise ValidationError(f"{where}: {e}") from e
    if kind not in _ENVELOPE_KINDS:
        raise ValidationError(
            f"{where}.kind: unknown envelope kind {kind!r} "
            f"(file-expressible kinds: {sorted(_ENVELOPE_KINDS)} and 'tabulated')"
        )
    extra = set(doc) - {"kind"}
    if extra:
        raise ValidationError(f"{where}: unexpected envelope fields {sorted(extra)}")
    return _ENVELOPE_KINDS[kind]()


def _parse_times(doc, where: str) -> np.ndarray:
    if isinstance(doc, list):
        return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(doc)])
    if isinstance(doc, dict):
        extra = set(doc) - {"start", "stop", "num"}
        if extra:
            raise ValidationError(f"{where}: unexpected fields {sorted(extra)}")
        start = _number(_require(doc, "start", where + "."), f"{where}.start")
        stop = _number(_require(doc, "stop", where + "."), f"{where}.stop")
        num = doc.get("num")
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            raise ValidationError(f"{where}.num: expected a positive integer, got {num!r}")
        return np.linspace(start, stop, num)
    raise ValidationError(f"{where}: expected a list of times or {{start, stop, num}}")


def _parse_ode(doc, where: str) -> OdeOptions:
    if doc is None:
        return OdeOptions()
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: expected an object")
    known = {"rtol", "atol", "max_step", "initial_step", "max_steps"}
    extra = set(doc) - known
    if extra:
        raise ValidationError(f"{where}: unexpected fields {sorted(extra)}")
    kwargs = {}
    for key in ("rtol", "atol"):
        if key in doc:
            kwargs[key] = _number(doc[key], f"{where}.{key}")
    for key in ("max_step", "initial_step"):
        if key in doc and doc[key] is not None:
            kwargs[key] = _number(doc[key], f"{where}.{key}")
    if "max_steps" in doc:
        v = doc["max_steps"]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"{where}.max_steps: expected an integer, got {v!r}")
        kwargs["max_steps"] = v
    try:
        return OdeOptions(**kwargs)
    except PulseSimError as e:
        raise ValidationError(f"{where}: {e}") from e


def _parse_initial_state(doc, where: str) -> QuantumState:
    if not isinstance(doc, dict) or len(doc) != 1 or next(iter(doc)) not in ("ket", "density"):
        raise ValidationError(f"{where}: expected an object with exactly one of 'ket' or 'density'")
    key, value = next(iter(doc.items()))
    try:
        if key == "ket":
            return ket(_vector_literal(value, f"{where}.ket"))
        return density(_matrix_literal(value, f"{where}.density"))
    except PulseSimError as e:
        raise ValidationError(f"{where}.{key}: {e}") from e


def parse_sequence_file(text: str) -> EvolveSpec:
    """Parse a sequence document into a fully validated EvolveSpec.

    Raises ParseError with a location for malformed JSON, UnknownNameError
    for unresolved operator/recipe names, and ValidationError naming the
    offending field for everything else.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be a JSON object")
    extra = set(doc) - _TOP_LEVEL_KEYS
    if extra:
        raise ValidationError(f"unexpected top-level fields {sorted(extra)}")

    dim = _require(doc, "dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError(f"dim: expected a positive integer, got {dim!r}")

    operators_raw = doc.get("operators", {})
    if not isinstance(operators_raw, dict):
        raise ValidationError("operators: expected an object of named operators")
    table = _OperatorTable(operators_raw)

    def operator_field(value, where: str, expect_dim: int | None = dim) -> np.ndarray:
        op = table.resolve(value, where)
        if expect_dim is not None and op.shape != (expect_dim, expect_dim):
            raise ValidationError(f"{where}: operator has shape {op.shape}, expected ({expect_dim}, {expect_dim})")
        return op

    recipes: dict[str, PulseRecipe] = {}
    recipes_raw = doc.get("recipes", {})
    if not isinstance(recipes_raw, dict):
        raise ValidationError("recipes: expected an object of named recipes")
    for name, rdoc in recipes_raw.items():
        where = f"recipes.{name}"
        if not isinstance(rdoc, dict):
            raise ValidationError(f"{where}: expected an object")
        extra = set(rdoc) - {"operator", "envelope", "defaults"}
        if extra:
            raise ValidationError(f"{where}: unexpected fields {sorted(extra)}")
        op = operator_field(_require(rdoc, "operator", where + "."), f"{where}.operator")
        env = _parse_envelope(_require(rdoc, "envelope", where + "."), f"{where}.envelope")
        defaults = rdoc.get("defaults", {})
        if not isinstance(defaults, dict):
            raise ValidationError(f"{where}.defaults: expected an object")
        defaults = {k: _number(v, f"{where}.defaults.{k}") for k, v in defaults.items()}
        try:
            recipes[name] = PulseRecipe(op, env, defaults)
        except PulseSimError as e:
            raise ValidationError(f"{where}: {e}") from e

    pulses: list[Pulse] = []
    pulses_raw = doc.get("pulses", [])
    if not isinstance(pulses_raw, list):
        raise ValidationError("pulses: expected a list")
    for i, pdoc in enumerate(pulses_raw):
        where = f"pulses[{i}]"
        if not isinstance(pdoc, dict):
            raise ValidationError(f"{where}: expected an object")
        extra = set(pdoc) - {"recipe", "params", "start", "duration"}
        if extra:
            raise ValidationError(f"{where}: unexpected fields {sorted(extra)}")
        rname = _require(pdoc, "recipe", where + ".")
        if rname not in recipes:
            raise UnknownNameError(f"{where}.recipe: unknown recipe {rname!r}")
        params = pdoc.get("params", {})
        if not isinstance(params, dict):
            raise ValidationError(f"{where}.params: expected an object")
        params = {k: _number(v, f"{where}.params.{k}") for k, v in params.items()}
        start = _number(_require(pdoc, "start", where + "."), f"{where}.start")
        duration = _number(_require(pdoc, "duration", where + "."), f"{where}.duration")
        try:
            pulses.append(Pulse(recipes[rname], params, start, duration))
        except PulseSimError as e:
            raise ValidationError(f"{where}: {e}") from e

    static = None
    if doc.get("static_hamiltonian") is not None:
        static = operator_field(doc["static_hamiltonian"], "static_hamiltonian")

    try:
        sequence = PulseSequence(tuple(pulses), static, dim)
    except PulseSimError as e:
        raise ValidationError(f"sequence: {e}") from e

    initial = _parse_initial_state(_require(doc, "initial_state"), "initial_state")
    times = _parse_times(_require(doc, "times"), "times")

    def operator_list(key: str) -> tuple[np.ndarray, ...]:
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            raise ValidationError(f"{key}: expected a list of operators")
        return tuple(operator_field(v, f"{key}[{i}]") for i, v in enumerate(raw))

    collapse_ops = operator_list("collapse_ops")
    e_ops = operator_list("e_ops")
    ode = _parse_ode(doc.get("ode"), "ode")

    engine_raw = doc.get("engine", Engine.SEGMENTED.value)
    try:
        engine = Engine(engine_raw)
    except ValueError:
        raise ValidationError(
            f"engine: expected 'segmented' or 'naive', got {engine_raw!r}"
        ) from None

    try:
        return EvolveSpec(sequence, initial, times, collapse_ops, e_ops, ode, engine)
    except PulseSimError as e:
        raise ValidationError(str(e)) from e


# ---------------------------------------------------------------------------
# canonical emission
# ---------------------------------------------------------------------------

def _emit_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _emit_matrix(m: np.ndarray) -> list:
    return [[_emit_complex(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]


def _emit_envelope(env: Envelope) -> dict:
    if isinstance(env, NativeCallback):
        raise ValidationError("callback envelopes are library-only and cannot be written to a file")
    if isinstance(env, TabulatedSamples):
        return {
            "kind": env.kind,
            "samples": [[float(t), float(f)] for t, f in zip(env.sample_times, env.sample_values)],
        }
    return {"kind": env.kind}


def emit_sequence_file(spec: EvolveSpec) -> str:
    """Canonical JSON form of a spec; parse_sequence_file round-trips it."""
    recipe_names: dict[int, str] = {}
    recipes_doc: dict[str, dict] = {}
    for p in spec.sequence.pulses:
        if id(p.recipe) not in recipe_names:
            name = f"recipe_{len(recipe_names)}"
            recipe_names[id(p.recipe)] = name
            recipes_doc[name] = {
                "operator": _emit_matrix(p.recipe.operator),
                "envelope": _emit_envelope(p.recipe.envelope),
                "defaults": {k: float(v) for k, v in sorted(p.recipe.defaults.items())},
            }

    doc: dict[str, Any] = {"dim": spec.sequence.dim}
    if recipes_doc:
        doc["recipes"] = recipes_doc
        doc["pulses"] = [
            {
                "recipe": recipe_names[id(p.recipe)],
                "params": {k: float(v) for k, v in sorted(p.params.items())},
                "start": p.start,
                "duration": p.duration,
            }
            for p in spec.sequence.pulses
        ]
    if spec.sequence.static_hamiltonian is not None:
        doc["static_hamiltonian"] = _emit_matrix(spec.sequence.static_hamiltonian)
    if spec.initial.kind is StateKind.KET:
        doc["initial_state"] = {"ket": [_emit_complex(z) for z in spec.initial.data]}
    else:
        doc["initial_state"] = {"density": _emit_matrix(spec.initial.data)}
    doc["times"] = [float(t) for t in spec.times]
    if spec.collapse_ops:
        doc["collapse_ops"] = [_emit_matrix(c) for c in spec.collapse_ops]
    if spec.e_ops:
        doc["e_ops"] = [_emit_matrix(e) for e in spec.e_ops]
    doc["ode"] = {
        "rtol": spec.ode.rtol,
        "atol": spec.ode.atol,
        "max_step": spec.ode.max_step,
        "initial_step": spec.ode.initial_step,
        "max_steps": spec.ode.max_steps,
    }
    doc["engine"] = spec.engine.value
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# result CSV
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def result_csv_lines(result: EvolveResult, version: str) -> list[str]:
    """Result serialization: '#' metadata lines, header, one row per time."""
    meta = [
        f"# engine: {result.stats.engine}",
        f"# segments: {result.stats.n_segments}",
        f"# wall_time_s: {result.stats.wall_time_s!r}",
        f"# version: {version}",
        f"# backend: {result.stats.backend}",
    ]
    lines = list(meta)
    if result.expectations is not None:
        n_ops = result.expectations.shape[0]
        header = ["time_s"] + [f"e{j}" for j in range(n_ops)]
        lines.append(",".join(header))
        for i, t in enumerate(result.times):
            row = [_fmt(t)] + [_fmt(result.expectations[j, i].real) for j in range(n_ops)]
            lines.append(",".join(row))
        return lines

    first = result.states[0]
    if first.kind is StateKind.KET:
        dim = first.dim
        labels = [x for i in range(dim) for x in (f"psi{i}_re", f"psi{i}_im")]
        lines.append(",".join(["time_s"] + labels))
        for t, st in zip(result.times, result.states):
            row = [_fmt(t)]
            for z in st.data:
                row += [_fmt(z.real), _fmt(z.imag)]
            lines.append(",".join(row))
    else:
        dim = first.dim
        labels = [
            x
            for i in range(dim)
            for j in range(dim)
            for x in (f"rho{i}_{j}_re", f"rho{i}_{j}_im")
        ]
        lines.append(",".join(["time_s"] + labels))
        for t, st in zip(result.times, result.states):
            row = [_fmt(t)]
            for i in range(dim):
                for j in range(dim):
                    z = st.data[i, j]
                    row += [_fmt(z.real), _fmt(z.imag)]
            lines.append(",".join(row))
    return lines


def write_result_csv(result: EvolveResult, path, version: str) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(result_csv_lines(result, version)) + "\n")


def read_result_csv(path):
    """Read back a result CSV: (metadata dict, column names, float matrix)."""
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
            elif not header:
                header = line.split(",")
            else:
                rows.append([float(x) for x in line.split(",")])
    return meta, header, np.array(rows)
