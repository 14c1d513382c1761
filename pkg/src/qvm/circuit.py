"""Circuit IR, executor, shot sampling and the line-oriented text format.

Text format, one operation per line::

    qubits 3
    oracle f 0 1 1 0        # table of f over 2^(#inputs) entries
    h 0
    rk(3) 2
    g(0.5,1.2) 0
    cnot 0 1
    query f 0 : 2           # |i>|j> -> |i>|j xor f(i)>
    measure 0 1 -> out
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .gates import GATES, GateMatrix, gate_arity, named_gate
from .state import (
    CONFIG,
    StateVector,
    apply_matrix,
    as_rng,
    basis_state,
    measure_qubits,
    outcome_distribution,
    project,
    register_values,
)

_INT_PARAM = {"rk", "crk", "rk_dg", "crk_dg"}
_SELF_INVERSE = {"i", "x", "not", "y", "z", "h", "cnot", "swap", "toffoli"}
_DAGGER_NAME = {"rk": "rk_dg", "rk_dg": "rk", "crk": "crk_dg", "crk_dg": "crk"}


@dataclass(eq=False)
class GateOp:
    name: str
    targets: tuple
    params: tuple = ()
    matrix: np.ndarray | None = None  # set only for unnamed unitaries

    def __post_init__(self):
        self.targets = tuple(int(t) for t in self.targets)
        self.params = tuple(self.params)
        self._gate = None

    @property
    def gate(self) -> GateMatrix:
        if self._gate is None:
            if self.matrix is not None:
                self._gate = GateMatrix(self.matrix, self.name, self.params)
            else:
                self._gate = named_gate(self.name, *self.params)
        return self._gate

    @property
    def qubits(self):
        return self.targets

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        if (self.name, self.targets, self.params) != (other.name, other.targets, other.params):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return np.array_equal(self.matrix, other.matrix)


@dataclass(frozen=True)
class OracleQuery:
    oracle_id: str
    inputs: tuple
    outputs: tuple

    @property
    def qubits(self):
        return tuple(self.inputs) + tuple(self.outputs)


@dataclass(frozen=True)
class Measure:
    qubits: tuple
    label: str


@dataclass
class Circuit:
    num_qubits: int
    ops: list = field(default_factory=list)
    oracles: dict = field(default_factory=dict)

    # -- builders -----------------------------------------------------
    def add(self, name: str, *targets: int, params: Sequence = ()) -> "Circuit":
        self.ops.append(GateOp(name.lower(), tuple(targets), tuple(params)))
        return self

    def add_matrix(self, matrix, targets: Sequence[int], name: str = "unitary") -> "Circuit":
        self.ops.append(GateOp(name, tuple(targets), (), np.asarray(matrix, dtype=complex)))
        return self

    def add_oracle(self, oracle_id: str, table: Sequence[int]) -> "Circuit":
        self.oracles[oracle_id] = tuple(int(v) for v in table)
        return self

    def query(self, oracle_id: str, inputs: Sequence[int], outputs: Sequence[int]) -> "Circuit":
        self.ops.append(OracleQuery(oracle_id, tuple(inputs), tuple(outputs)))
        return self

    def measure(self, qubits: Sequence[int], label: str) -> "Circuit":
        self.ops.append(Measure(tuple(qubits), label))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.num_qubits > self.num_qubits:
            raise DomainError("appended circuit is wider than this one")
        self.ops.extend(other.ops)
        self.oracles.update(other.oracles)
        return self

    # -- inspection ---------------------------------------------------
    @property
    def labels(self) -> list:
        return [op.label for op in self.ops if isinstance(op, Measure)]

    def count(self, kind=None) -> int:
        if kind is None:
            return len(self.ops)
        return sum(isinstance(op, kind) for op in self.ops)

    def validate(self) -> None:
        if self.num_qubits < 1:
            raise ValidationError("a circuit needs at least one qubit")
        labels = set()
        for pos, op in enumerate(self.ops):
            qs = op.qubits
            for q in qs:
                if not 0 <= q < self.num_qubits:
                    raise ValidationError(f"op {pos}: qubit {q} out of range for {self.num_qubits} qubits")
            if len(set(qs)) != len(qs):
                raise ValidationError(f"op {pos}: repeated qubit in {qs}")
            if isinstance(op, GateOp):
                try:
                    arity = op.gate.arity
                except DomainError as exc:
                    raise ValidationError(f"op {pos}: {exc}") from exc
                if arity != len(op.targets):
                    raise ValidationError(
                        f"op {pos}: gate {op.name} has arity {arity}, got {len(op.targets)} targets"
                    )
            elif isinstance(op, OracleQuery):
                table = self.oracles.get(op.oracle_id)
                if table is None:
                    raise ValidationError(f"op {pos}: unknown oracle {op.oracle_id!r}")
                if len(table) != 1 << len(op.inputs):
                    raise ValidationError(f"op {pos}: oracle {op.oracle_id!r} needs {1 << len(op.inputs)} entries")
                if any(not 0 <= v < 1 << len(op.outputs) for v in table):
                    raise ValidationError(f"op {pos}: oracle values exceed {len(op.outputs)} output qubits")
            elif isinstance(op, Measure):
                if op.label in labels:
                    raise ValidationError(f"op {pos}: duplicate register label {op.label!r}")
                labels.add(op.label)
            else:
                raise ValidationError(f"op {pos}: unknown operation {op!r}")

    def inverse(self) -> "Circuit":
        """Reversed circuit of daggered gates; oracle queries are self-inverse."""
        out = Circuit(self.num_qubits, oracles=dict(self.oracles))
        for op in reversed(self.ops):
            if isinstance(op, Measure):
                raise ValidationError("cannot invert a circuit containing measurements")
            if isinstance(op, OracleQuery):
                out.ops.append(op)
            elif op.matrix is None and op.name in _SELF_INVERSE:
                out.ops.append(GateOp(op.name, op.targets, op.params))
            elif op.matrix is None and op.name in _DAGGER_NAME:
                out.ops.append(GateOp(_DAGGER_NAME[op.name], op.targets, op.params))
            elif op.matrix is None and op.name == "g":
                out.ops.append(GateOp("g", op.targets, (-op.params[0], op.params[1])))
            else:
                out.ops.append(GateOp(op.name + "_dg", op.targets, (), op.gate.matrix.conj().T))
        return out

    def unitary(self) -> np.ndarray:
        """Dense matrix of a measurement-free circuit (small n only)."""
        dim = 1 << self.num_qubits
        out = np.empty((dim, dim), dtype=complex)
        for c in range(dim):
            out[:, c] = run_unitary(self, basis_state(self.num_qubits, c)).amplitudes
        return out


# -- execution ------------------------------------------------------------

_PERM_CACHE: dict = {}


def query_permutation(n: int, table: Sequence[int], inputs: Sequence[int], outputs: Sequence[int]) -> np.ndarray:
    """perm[x] = index reached from basis x by |i>|j> -> |i>|j xor f(i)>."""
    key = (n, tuple(table), tuple(inputs), tuple(outputs))
    perm = _PERM_CACHE.get(key)
    if perm is None:
        i = register_values(n, inputs)
        fvals = np.asarray(table, dtype=np.int64)[i]
        flip = np.zeros(1 << n, dtype=np.int64)
        for pos, q in enumerate(outputs):
            bit = (fvals >> (len(outputs) - 1 - pos)) & 1
            flip |= bit << (n - 1 - q)
        perm = np.arange(1 << n) ^ flip
        if len(_PERM_CACHE) > 256:
            _PERM_CACHE.clear()
        _PERM_CACHE[key] = perm
    return perm


def apply_query(state: StateVector, table, inputs, outputs) -> StateVector:
    perm = query_permutation(state.num_qubits, table, inputs, outputs)
    amps = np.empty_like(state.amplitudes)
    amps[perm] = state.amplitudes
    return StateVector(state.num_qubits, amps)


def _apply_op(amps: np.ndarray, circuit: Circuit, op, n: int) -> np.ndarray:
    if isinstance(op, GateOp):
        return apply_matrix(amps, n, op.gate.matrix, op.targets)
    perm = query_permutation(n, circuit.oracles[op.oracle_id], op.inputs, op.outputs)
    out = np.empty_like(amps)
    out[perm] = amps
    return out


def run_unitary(circuit: Circuit, state: StateVector) -> StateVector:
    """Apply every non-measurement op of ``circuit`` to ``state``."""
    n = circuit.num_qubits
    amps = state.amplitudes
    for op in circuit.ops:
        if isinstance(op, Measure):
            raise ValidationError("run_unitary got a measurement; use execute")
        amps = _apply_op(amps, circuit, op, n)
    out = StateVector(n, amps)
    out.check_norm()
    return out


@dataclass
class RunResult:
    registers: dict  # label -> Counter of bit strings
    shots: int
    final_state: StateVector | None = None
    queries: int = 0
    histogram: Counter = field(default_factory=Counter)  # joint outcome keyed by "r1 r2 ..."

    def outcome(self, label: str) -> str:
        """The single recorded value of ``label`` (one-shot results)."""
        (value,) = self.registers[label].keys()
        return value

    def to_dict(self, amplitudes: bool = False) -> dict:
        doc = {
            "shots": self.shots,
            "queries": self.queries,
            "registers": {k: dict(sorted(v.items())) for k, v in self.registers.items()},
            "histogram": dict(sorted(self.histogram.items())),
        }
        if amplitudes and self.final_state is not None:
            doc["amplitudes"] = [
                ["%.17g" % a.real, "%.17g" % a.imag] for a in self.final_state.amplitudes
            ]
        return doc

    def to_json(self, amplitudes: bool = False) -> str:
        return json.dumps(self.to_dict(amplitudes), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["outcome,count"]
        lines += [f"{k},{v}" for k, v in sorted(self.histogram.items())]
        return "\n".join(lines) + "\n"


def _terminal_measurements(circuit: Circuit) -> bool:
    seen_measure = False
    measured = set()
    for op in circuit.ops:
        if isinstance(op, Measure):
            seen_measure = True
            if measured & set(op.qubits):
                return False
            measured |= set(op.qubits)
        elif seen_measure:
            return False
    return True


def execute(circuit: Circuit, input: int = 0, rng=None, initial: StateVector | None = None) -> RunResult:
    """One run: ops applied in order with mid-circuit collapse at measurements."""
    circuit.validate()
    rng = as_rng(rng)
    n = circuit.num_qubits
    state = basis_state(n, input) if initial is None else initial
    if state.num_qubits != n:
        raise DomainError("initial state width does not match the circuit")
    amps = state.amplitudes
    registers, joint, queries = {}, [], 0
    for op in circuit.ops:
        if isinstance(op, Measure):
            rec, collapsed = measure_qubits(StateVector(n, amps), op.qubits, rng)
            amps = collapsed.amplitudes
            registers[op.label] = Counter({rec.outcome: 1})
            joint.append(rec.outcome)
        else:
            queries += isinstance(op, OracleQuery)
            amps = _apply_op(amps, circuit, op, n)
    final = StateVector(n, amps)
    final.check_norm()
    return RunResult(registers, 1, final, queries, Counter({" ".join(joint): 1}))


def sample(circuit: Circuit, input: int = 0, shots: int = 1, rng=None) -> RunResult:
    """``shots`` independent executions, merged into one histogram."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    circuit.validate()
    rng = as_rng(rng)
    measures = [op for op in circuit.ops if isinstance(op, Measure)]
    if _terminal_measurements(circuit):
        n = circuit.num_qubits
        body = Circuit(n, [op for op in circuit.ops if not isinstance(op, Measure)], circuit.oracles)
        state = run_unitary(body, basis_state(n, input))
        qubits = [q for m in measures for q in m.qubits]
        probs = outcome_distribution(state, qubits)
        probs = np.where(probs < CONFIG.zero_branch, 0.0, probs)
        counts = rng.multinomial(shots, probs / probs.sum())
        hist, registers = Counter(), {m.label: Counter() for m in measures}
        width = len(qubits)
        for value in np.flatnonzero(counts):
            bits = format(int(value), f"0{width}b") if width else ""
            parts, pos = [], 0
            for m in measures:
                part = bits[pos:pos + len(m.qubits)]
                pos += len(m.qubits)
                registers[m.label][part] += int(counts[value])
                parts.append(part)
            hist[" ".join(parts)] += int(counts[value])
        queries = body.count(OracleQuery) * shots
        return RunResult(registers, shots, None, queries, hist)
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(shots)
    total = RunResult({m.label: Counter() for m in measures}, 0)
    for seed in seeds:
        res = execute(circuit, input, np.random.default_rng(seed))
        merge_into(total, res)
    return total


def merge_into(total: RunResult, res: RunResult) -> RunResult:
    """Accumulate ``res`` into ``total`` (associative, order independent)."""
    for k, v in res.registers.items():
        total.registers.setdefault(k, Counter()).update(v)
    total.histogram.update(res.histogram)
    total.shots += res.shots
    total.queries += res.queries
    return total


def exact_distribution(circuit: Circuit, input: int = 0) -> dict:
    """Joint outcome probabilities by walking the full measurement branch tree."""
    circuit.validate()
    n = circuit.num_qubits
    branches = [(basis_state(n, input).amplitudes, 1.0, ())]
    for op in circuit.ops:
        if isinstance(op, Measure):
            nxt = []
            for amps, p, key in branches:
                st = StateVector(n, amps)
                probs = outcome_distribution(st, op.qubits)
                for v, pv in enumerate(probs):
                    if pv < CONFIG.zero_branch:
                        continue
                    nxt.append((project(st, op.qubits, v).amplitudes, p * pv,
                                key + (format(v, f"0{len(op.qubits)}b"),)))
            branches = nxt
        else:
            branches = [(_apply_op(a, circuit, op, n), p, k) for a, p, k in branches]
    out: dict = {}
    for _, p, key in branches:
        k = " ".join(key)
        out[k] = out.get(k, 0.0) + p
    return out


# -- text format ----------------------------------------------------------

_GATE_RE = re.compile(r"^([a-z_][a-z0-9_]*)(?:\(([^)]*)\))?$")


def parse_circuit(text: str) -> Circuit:
    circuit = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        try:
            if head == "qubits":
                if circuit is not None:
                    raise ValidationError("repeated qubits header")
                if len(tokens) != 2:
                    raise ValidationError("expected 'qubits N'")
                circuit = Circuit(int(tokens[1]))
                continue
            if circuit is None:
                raise ValidationError("missing 'qubits N' header")
            if head == "oracle":
                circuit.add_oracle(tokens[1], [int(t) for t in tokens[2:]])
            elif head == "measure":
                if "->" not in tokens or tokens[-2] != "->":
                    raise ValidationError("expected 'measure q... -> label'")
                circuit.measure([int(t) for t in tokens[1:-2]], tokens[-1])
            elif head == "query":
                if ":" not in tokens:
                    raise ValidationError("expected 'query id in... : out...'")
                sep = tokens.index(":")
                circuit.query(tokens[1], [int(t) for t in tokens[2:sep]], [int(t) for t in tokens[sep + 1:]])
            else:
                m = _GATE_RE.match(head)
                if not m:
                    raise ValidationError(f"cannot parse {tokens[0]!r}")
                name, args = m.group(1), m.group(2)
                if name not in GATES and name not in ("ccnot", "cx"):
                    raise ValidationError(f"unknown gate {name!r}")
                params = ()
                if args is not None:
                    conv = int if name in _INT_PARAM else float
                    params = tuple(conv(a) for a in args.split(","))
                targets = [int(t) for t in tokens[1:]]
                if len(targets) != gate_arity(name):
                    raise ValidationError(f"gate {name} has arity {gate_arity(name)}, got {len(targets)} targets")
                circuit.add(name, *targets, params=params)
            circuit.validate()
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    if circuit is None:
        raise ValidationError("empty circuit text")
    return circuit


def render_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for oid, table in circuit.oracles.items():
        lines.append(f"oracle {oid} " + " ".join(map(str, table)))
    for op in circuit.ops:
        if isinstance(op, Measure):
            lines.append("measure " + " ".join(map(str, op.qubits)) + f" -> {op.label}")
        elif isinstance(op, OracleQuery):
            lines.append(f"query {op.oracle_id} " + " ".join(map(str, op.inputs)) + " : " + " ".join(map(str, op.outputs)))
        else:
            if op.matrix is not None:
                raise ValidationError(f"gate {op.name!r} is a raw matrix with no text form")
            p = f"({','.join(repr(x) for x in op.params)})" if op.params else ""
            lines.append(f"{op.name}{p} " + " ".join(map(str, op.targets)))
    return "\n".join(lines) + "\n"
