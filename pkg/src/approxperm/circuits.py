"""Gate-level reversible circuits (NOT, CNOT, Toffoli) over a bit register.

Builds Cuccaro ripple-carry adders, constant adders, runway initialization and
piecewise runway adders, and simulates them on batches of computational basis
states. States are boolean arrays of shape ``(num_bits,)`` or
``(num_bits, batch)``; bit ``i`` of an integer register value sits at the
``i``-th listed bit position.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .aep import Decoded, DomainError, Leak, Value
from .representations import LayoutParams, make_multi_runway_aep, runway_values


class Gate(NamedTuple):
    controls: tuple
    target: int

    @property
    def kind(self) -> str:
        return ("NOT", "CNOT", "CCX")[len(self.controls)]

    @property
    def bits(self) -> tuple:
        return self.controls + (self.target,)


def NOT(t: int) -> Gate:
    return Gate((), t)


def CNOT(c: int, t: int) -> Gate:
    return Gate((c,), t)


def TOFFOLI(c1: int, c2: int, t: int) -> Gate:
    return Gate((c1, c2), t)


@dataclasses.dataclass(frozen=True)
class Circuit:
    num_bits: int
    gates: tuple
    labels: Mapping[str, tuple] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if len(gate.controls) > 2:
                raise DomainError(f"unsupported gate {gate}")
            if len(set(gate.bits)) != len(gate.bits):
                raise DomainError(f"gate {gate} repeats a bit")
            if any(not 0 <= b < self.num_bits for b in gate.bits):
                raise DomainError(f"gate {gate} outside {self.num_bits} bits")

    @property
    def toffoli_count(self) -> int:
        return sum(len(g.controls) == 2 for g in self.gates)

    def inverse(self) -> "Circuit":
        # every gate in the set is self-inverse
        return Circuit(self.num_bits, self.gates[::-1], self.labels)

    def then(self, other: "Circuit") -> "Circuit":
        if other.num_bits != self.num_bits:
            raise DomainError("circuits act on different registers")
        return Circuit(self.num_bits, self.gates + other.gates,
                       {**self.labels, **other.labels})

    def to_text(self) -> str:
        lines = [f"bits {self.num_bits}"]
        for gate in self.gates:
            lines.append(" ".join([gate.kind, *map(str, gate.bits)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0][0] != "bits" or len(rows[0]) != 2:
            raise DomainError("missing 'bits N' header")
        arity = {"NOT": 1, "CNOT": 2, "CCX": 3}
        gates = []
        for row in rows[1:]:
            if row[0] not in arity or len(row) != arity[row[0]] + 1:
                raise DomainError(f"bad gate line: {' '.join(row)}")
            bits = tuple(int(x) for x in row[1:])
            gates.append(Gate(bits[:-1], bits[-1]))
        return cls(int(rows[0][1]), gates)


@dataclasses.dataclass(frozen=True)
class CostTally:
    toffoli_count: int
    toffoli_depth: int


def apply_circuit(circuit: Circuit, state) -> np.ndarray:
    """Apply the gates in order to one state or a batch of states."""
    state = np.array(state, dtype=bool)
    if state.shape[0] != circuit.num_bits:
        raise DomainError(
            f"state has {state.shape[0]} bits, circuit expects {circuit.num_bits}")
    for gate in circuit.gates:
        c = gate.controls
        if not c:
            state[gate.target] ^= True
        elif len(c) == 1:
            state[gate.target] ^= state[c[0]]
        else:
            state[gate.target] ^= state[c[0]] & state[c[1]]
    return state


def count_costs(circuit: Circuit) -> CostTally:
    """Toffoli count and Toffoli depth under greedy as-early-as-possible layering."""
    depth = [0] * circuit.num_bits
    for gate in circuit.gates:
        level = max(depth[b] for b in gate.bits) + (len(gate.controls) == 2)
        for b in gate.bits:
            depth[b] = level
    return CostTally(circuit.toffoli_count, max(depth, default=0))


def load_register(state: np.ndarray, bits: Sequence[int], values) -> None:
    """Write integer ``values`` (one per batch column) into ``bits`` in place."""
    values = np.asarray(values)
    wide = values.dtype == object or len(bits) > 62
    for i, b in enumerate(bits):
        if wide:
            state[b] = [(int(x) >> i) & 1 for x in np.atleast_1d(values)]
        else:
            state[b] = (values >> i) & 1


def read_register(state: np.ndarray, bits: Sequence[int]) -> np.ndarray:
    """Integer value of ``bits`` for every batch column."""
    if len(bits) > 62:
        out = np.zeros(state.shape[1:], dtype=object)
        for i, b in enumerate(bits):
            out = out + (state[b].astype(object) << i)
        return out
    out = np.zeros(state.shape[1:], dtype=np.int64)
    for i, b in enumerate(bits):
        out |= state[b].astype(np.int64) << i
    return out


def blank_state(circuit: Circuit, batch: int) -> np.ndarray:
    return np.zeros((circuit.num_bits, batch), dtype=bool)


def run_registers(circuit: Circuit, inputs: Mapping[str, object],
                  outputs: Iterable[str]) -> dict:
    """Load labelled registers, run the circuit, read labelled registers back.

    Unlisted bits start at zero. Input values may be scalars or equal-length arrays.
    """
    arrays = {name: np.atleast_1d(np.asarray(v)) for name, v in inputs.items()}
    batch = max((len(a) for a in arrays.values()), default=1)
    state = blank_state(circuit, batch)
    for name, values in arrays.items():
        load_register(state, circuit.labels[name], np.broadcast_to(values, (batch,)))
    state = apply_circuit(circuit, state)
    return {name: read_register(state, circuit.labels[name]) for name in outputs}


def _cuccaro(a: Sequence[int], b: Sequence[int], anc: int) -> list:
    """In-place ``b += a (mod 2^len(b))`` using one zeroed carry ancilla; 2n Toffolis."""
    n = len(a)
    gates = []
    carries = [anc] + list(a[:-1])
    for i in range(n):  # MAJ
        gates += [CNOT(a[i], b[i]), CNOT(a[i], carries[i]), TOFFOLI(carries[i], b[i], a[i])]
    for i in reversed(range(n)):  # UMA
        gates += [TOFFOLI(carries[i], b[i], a[i]), CNOT(a[i], carries[i]), CNOT(carries[i], b[i])]
    return gates


def build_ripple_adder(n: int) -> Circuit:
    """Cuccaro ripple-carry adder: ``(a, b, 0) -> (a, (a + b) mod 2^n, 0)``.

    Bits ``[0, n)`` hold ``a``, ``[n, 2n)`` hold ``b``, bit ``2n`` is the ancilla.
    """
    if n < 1:
        raise DomainError("n must be positive")
    a, b = tuple(range(n)), tuple(range(n, 2 * n))
    return Circuit(2 * n + 1, _cuccaro(a, b, 2 * n),
                   {"a": a, "b": b, "ancilla": (2 * n,)})


def _constant_add(target: Sequence[int], scratch: Sequence[int], anc: int, k: int) -> list:
    load = [NOT(scratch[i]) for i in range(len(target)) if (k >> i) & 1]
    return load + _cuccaro(scratch, target, anc) + load


def build_constant_adder(n: int, k: int) -> Circuit:
    """``(b, 0) -> ((b + k) mod 2^n, 0)`` by loading ``k`` into a scratch register."""
    if n < 1:
        raise DomainError("n must be positive")
    if not 0 <= k < 1 << n:
        raise DomainError(f"constant {k} outside [0, 2^{n})")
    b, const = tuple(range(n)), tuple(range(n, 2 * n))
    return Circuit(2 * n + 1, _constant_add(b, const, 2 * n, k),
                   {"b": b, "const": const, "ancilla": (2 * n,)})


def _packed_labels(layout: LayoutParams) -> dict:
    labels = {}
    for j, (off, data, runway, _) in enumerate(layout.piece_layout()):
        labels[f"piece{j}"] = tuple(range(off, off + data + runway))
        labels[f"runway{j}"] = tuple(range(off + data, off + data + runway))
    labels["register"] = tuple(range(layout.packed_width))
    return labels


def build_layout_init(layout: LayoutParams) -> Circuit:
    """Encode ``g`` with runway values into the packed multi-runway layout.

    The register starts with ``g``'s bits in the data positions and each
    runway holding its coset value (standing in for the ``|+>`` state). Each
    runway value is subtracted from the piece above it, runway bits included,
    working from the top runway down.
    """
    pieces = layout.piece_layout()
    labels = _packed_labels(layout)
    width = layout.packed_width
    targets = [labels[f"piece{j + 1}"] for j in range(layout.r)]
    pad = max([len(t) - layout.m for t in targets] + [0])
    scratch = tuple(range(width, width + pad))
    anc = width + pad
    gates = []
    for j in reversed(range(layout.r)):
        if layout.m == 0:
            continue
        target = targets[j]
        runway = labels[f"runway{j}"][: len(target)]
        addend = runway + scratch[: len(target) - len(runway)]
        flip = [NOT(b) for b in target]
        # b - a == ~(~b + a)
        gates += flip + _cuccaro(addend, target, anc) + flip
    labels.update(pad=scratch, ancilla=(anc,))
    labels["data"] = tuple(b for off, data, _, _ in pieces for b in range(off, off + data))
    return Circuit(width + pad + 1, gates, labels)


def build_runway_init(n: int, p: int, m: int) -> Circuit:
    """Single runway of length ``m`` at position ``p`` in an ``n``-bit register."""
    if m and not 1 <= p <= n - m:
        raise DomainError(f"runway position p = {p} outside [1, {n - m}]")
    return build_layout_init(LayoutParams(n, (p,), m))


def build_piecewise_adder(layout: LayoutParams, k: int) -> Circuit:
    """Add ``k`` piece by piece; no gate touches two pieces.

    Piece ``j`` (its data bits plus its runway) receives the ``j``-th constant
    slice of ``k`` and owns a private scratch register and carry ancilla.
    """
    labels = _packed_labels(layout)
    slices = layout.constant_slices(k)
    nxt = layout.packed_width
    gates = []
    for j, value in enumerate(slices):
        target = labels[f"piece{j}"]
        if not target:
            continue
        scratch = tuple(range(nxt, nxt + len(target)))
        anc = nxt + len(target)
        nxt = anc + 1
        labels[f"const{j}"] = scratch
        labels[f"ancilla{j}"] = (anc,)
        gates += _constant_add(target, scratch, anc, value)
    return Circuit(nxt, gates, labels)


def piece_bit_sets(circuit: Circuit, layout: LayoutParams) -> list:
    """Bits owned by each piece of a piecewise adder (data, runway, scratch)."""
    out = []
    for j in range(layout.r + 1):
        bits = set(circuit.labels[f"piece{j}"])
        bits |= set(circuit.labels.get(f"const{j}", ()))
        bits |= set(circuit.labels.get(f"ancilla{j}", ()))
        out.append(bits)
    return out


def _run_packed(circuit: Circuit, packed: np.ndarray, width: int) -> np.ndarray:
    state = blank_state(circuit, len(packed))
    bits = tuple(range(width))
    load_register(state, bits, packed)
    state = apply_circuit(circuit, state)
    if state[width:].any():
        raise AssertionError("scratch bits were not returned to zero")
    return read_register(state, bits)


def initial_packed(layout: LayoutParams, g, c) -> np.ndarray:
    """Packed register before initialization: ``g`` in the data bits, runways hold ``c``."""
    g = np.atleast_1d(np.asarray(g, dtype=np.int64))
    c = np.broadcast_to(np.atleast_1d(np.asarray(c, dtype=np.int64)), g.shape)
    out = np.zeros(g.shape, dtype=np.int64)
    values = runway_values(layout, c)
    for j, (off, data, runway, start) in enumerate(layout.piece_layout()):
        out |= ((g >> start) & ((1 << data) - 1)) << off
        if runway:
            out |= values[j] << (off + data)
    return out


def simulate_addition_sequence_batch(layout: LayoutParams, constants: Sequence[int], g, c):
    """Vectorized :func:`simulate_addition_sequence`; returns ``(g, c, leak_index)`` arrays."""
    if layout.modulus is not None:
        raise DomainError("the simulator handles plain layouts only")
    init = build_layout_init(layout)
    width = layout.packed_width
    packed = _run_packed(init, initial_packed(layout, g, c), width)
    for k in constants:
        packed = _run_packed(build_piecewise_adder(layout, k), packed, width)
    return make_multi_runway_aep(layout, 0).decode_arrays(packed)


def simulate_addition_sequence(layout: LayoutParams, constants: Sequence[int],
                               g: int, c: int) -> Decoded:
    """Encode ``(g, c)``, apply one piecewise adder per constant, decode.

    The decoded value is ``(g + sum(constants)) mod 2^n`` unless a runway
    overflowed along the way.
    """
    dg, dc, idx = simulate_addition_sequence_batch(layout, constants, [g], [c])
    if idx[0] >= 0:
        return Leak(int(idx[0]))
    return Value(int(dg[0]), int(dc[0]))
