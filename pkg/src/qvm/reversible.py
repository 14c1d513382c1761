"""Reversible compilation of Boolean circuits into Toffoli/CNOT/NOT networks."""
from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit
from .errors import ValidationError

_ARITY = {"not": 1, "and": 2, "or": 2, "xor": 2}


@dataclass
class ClassicalCircuit:
    """Boolean circuit with fanout.

    Wires 0..n-1 are the inputs; gate number g writes wire n + g.  Each gate
    is ``(kind, input wires...)``.  ``outputs`` lists the wires read out, most
    significant first.
    """

    num_inputs: int
    gates: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def add(self, kind: str, *wires: int) -> int:
        self.gates.append((kind.lower(), *wires))
        return self.num_inputs + len(self.gates) - 1

    def validate(self) -> None:
        for g, (kind, *wires) in enumerate(self.gates):
            if kind not in _ARITY:
                raise ValidationError(f"gate {g}: unknown kind {kind!r}")
            if len(wires) != _ARITY[kind]:
                raise ValidationError(f"gate {g}: {kind} takes {_ARITY[kind]} input(s)")
            for w in wires:
                if not 0 <= w < self.num_inputs + g:
                    raise ValidationError(f"gate {g}: wire {w} is not computed before it")
        for w in self.outputs:
            if not 0 <= w < self.num_inputs + len(self.gates):
                raise ValidationError(f"output wire {w} does not exist")
        if not self.outputs:
            raise ValidationError("circuit has no outputs")

    def evaluate(self, x: int) -> int:
        """Classical value f(x); input bit 0 is the most significant bit of x."""
        n = self.num_inputs
        vals = [(x >> (n - 1 - k)) & 1 for k in range(n)]
        for kind, *w in self.gates:
            a = vals[w[0]]
            b = vals[w[1]] if len(w) > 1 else 0
            vals.append({"not": 1 - a, "and": a & b, "or": a | b, "xor": a ^ b}[kind])
        out = 0
        for w in self.outputs:
            out = (out << 1) | vals[w]
        return out

    def table(self) -> list:
        return [self.evaluate(x) for x in range(1 << self.num_inputs)]


def compile_reversible(cc: ClassicalCircuit) -> Circuit:
    """Quantum circuit mapping |0^b, i, j> to |0^b, i, f(i) xor j>.

    The b = S work qubits hold the gate wires.  Compute, copy the outputs with
    CNOTs, then run the compute gates in reverse to return the work qubits to 0.
    """
    cc.validate()
    n, m, b = cc.num_inputs, cc.num_outputs, len(cc.gates)

    def qubit(wire):
        return b + wire if wire < n else wire - n

    compute = Circuit(b + n + m)
    for g, (kind, *w) in enumerate(cc.gates):
        c = g
        qs = [qubit(x) for x in w]
        if kind == "not":
            compute.add("cnot", qs[0], c).add("x", c)
        elif qs[0] == qs[1]:
            # AND(a, a) = OR(a, a) = a and XOR(a, a) = 0.
            if kind != "xor":
                compute.add("cnot", qs[0], c)
        elif kind == "and":
            compute.add("toffoli", qs[0], qs[1], c)
        elif kind == "xor":
            compute.add("cnot", qs[0], c).add("cnot", qs[1], c)
        else:  # a or b = a xor b xor ab
            compute.add("cnot", qs[0], c).add("cnot", qs[1], c).add("toffoli", qs[0], qs[1], c)
    out = Circuit(b + n + m)
    out.extend(compute)
    for k, w in enumerate(cc.outputs):
        out.add("cnot", qubit(w), b + n + k)
    out.extend(compute.inverse())
    return out


def parity_circuit(n: int) -> ClassicalCircuit:
    cc = ClassicalCircuit(n)
    acc = 0
    for k in range(1, n):
        acc = cc.add("xor", acc, k)
    cc.outputs = [acc]
    return cc
