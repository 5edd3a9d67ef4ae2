"""
Circuit records and the line-based circuit text format

Format (one statement per line, ``#`` starts a comment)::

    QUBITS 3
    INIT 0 L1
    INIT 1 L2
    INIT 2 0
    CNOT 0 2
    CNOT 1 2
    RZ 0.25 2
    MPP Z0*Z1*Z2

``INIT q 0|+|L<i>`` marks a |0⟩ ancilla, a |+⟩ ancilla or the input of
logical qubit i (rendered with ``config.LABEL_BASE``).
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from paritycode.config import config
from paritycode.errors import CodeFormatError
from paritycode.pauli import PauliString

CLIFFORD_GATES = frozenset({'CNOT', 'H', 'S', 'X', 'Z'})
UNITARY_GATES = CLIFFORD_GATES | {'RZ'}
MEASUREMENT_GATES = frozenset({'MX', 'MZ', 'MPP'})
_ARITY = {'CNOT': 2, 'H': 1, 'S': 1, 'X': 1, 'Z': 1, 'RZ': 1, 'MX': 1, 'MZ': 1}


class InitKind(Enum):
    ZERO = '0'
    PLUS = '+'
    LOGICAL = 'L'


@dataclass(frozen=True)
class QubitInit:
    kind: InitKind
    logical: Optional[int] = None

    def to_text(self, base: Optional[int] = None) -> str:
        if self.kind is InitKind.LOGICAL:
            base = config.LABEL_BASE if base is None else base
            return f'L{self.logical + base}'
        return self.kind.value

    @classmethod
    def parse(cls, token: str, base: Optional[int] = None) -> 'QubitInit':
        base = config.LABEL_BASE if base is None else base
        if token == '0':
            return cls(InitKind.ZERO)
        if token == '+':
            return cls(InitKind.PLUS)
        if token[:1].upper() == 'L' and token[1:].isdigit():
            logical = int(token[1:]) - base
            if logical < 0:
                raise CodeFormatError(f'logical input {token} below label base {base}')
            return cls(InitKind.LOGICAL, logical)
        raise CodeFormatError(f'bad INIT token {token!r}')


ZERO = QubitInit(InitKind.ZERO)
PLUS = QubitInit(InitKind.PLUS)


def logical_input(i: int) -> QubitInit:
    return QubitInit(InitKind.LOGICAL, i)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...] = ()
    angle: Optional[float] = None
    pauli: Optional[PauliString] = None

    @classmethod
    def cnot(cls, control: int, target: int) -> 'Gate':
        return cls('CNOT', (control, target))

    @classmethod
    def h(cls, q: int) -> 'Gate':
        return cls('H', (q,))

    @classmethod
    def s(cls, q: int) -> 'Gate':
        return cls('S', (q,))

    @classmethod
    def x(cls, q: int) -> 'Gate':
        return cls('X', (q,))

    @classmethod
    def z(cls, q: int) -> 'Gate':
        return cls('Z', (q,))

    @classmethod
    def rz(cls, angle: float, q: int) -> 'Gate':
        return cls('RZ', (q,), angle=float(angle))

    @classmethod
    def mx(cls, q: int) -> 'Gate':
        return cls('MX', (q,))

    @classmethod
    def mz(cls, q: int) -> 'Gate':
        return cls('MZ', (q,))

    @classmethod
    def mpp(cls, pauli: PauliString) -> 'Gate':
        return cls('MPP', tuple(pauli.support()), pauli=pauli)

    @property
    def is_clifford(self) -> bool:
        return self.name in CLIFFORD_GATES

    @property
    def is_measurement(self) -> bool:
        return self.name in MEASUREMENT_GATES

    def remapped(self, mapping: Mapping[int, int], n: Optional[int] = None) -> 'Gate':
        """Same gate on relabelled qubits (MPP needs the new register size n)."""
        if self.name == 'MPP':
            x = [0] * n
            z = [0] * n
            for q in self.pauli.support():
                x[mapping[q]] = int(self.pauli.x[q])
                z[mapping[q]] = int(self.pauli.z[q])
            return Gate.mpp(PauliString(x, z, self.pauli.sign))
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.angle)

    def to_text(self) -> str:
        if self.name == 'RZ':
            return f'RZ {self.angle!r} {self.qubits[0]}'
        if self.name == 'MPP':
            return f'MPP {self.pauli.to_product()}'
        return ' '.join([self.name] + [str(q) for q in self.qubits])


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: Tuple[Gate, ...] = ()
    ancilla_init: Mapping[int, QubitInit] = field(default_factory=dict)
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        object.__setattr__(self, 'ancilla_init', dict(self.ancilla_init))
        object.__setattr__(self, 'metadata', dict(self.metadata))
        for gate in self.gates:
            for q in gate.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CodeFormatError(f'{gate.to_text()!r} touches qubit {q} outside 0..{self.num_qubits - 1}')
            if gate.name == 'CNOT' and gate.qubits[0] == gate.qubits[1]:
                raise CodeFormatError('CNOT control and target must differ')
            if gate.name == 'MPP' and gate.pauli.n != self.num_qubits:
                raise CodeFormatError('MPP operator size does not match the register')
        for q in self.ancilla_init:
            if not 0 <= q < self.num_qubits:
                raise CodeFormatError(f'INIT for qubit {q} outside register')

    def __len__(self) -> int:
        return len(self.gates)

    def is_clifford(self) -> bool:
        return all(g.is_clifford for g in self.gates)

    def has_measurements(self) -> bool:
        return any(g.is_measurement for g in self.gates)

    def then(self, other: 'Circuit') -> 'Circuit':
        if other.num_qubits != self.num_qubits:
            raise CodeFormatError('cannot concatenate circuits on different registers')
        merged = dict(self.ancilla_init)
        merged.update(other.ancilla_init)
        meta = dict(self.metadata)
        meta.update(other.metadata)
        return Circuit(self.num_qubits, self.gates + other.gates, merged, meta)

    def logical_inputs(self) -> Dict[int, int]:
        """qubit -> logical index for every INIT L<i> line."""
        return {q: init.logical for q, init in self.ancilla_init.items() if init.kind is InitKind.LOGICAL}

    # -- text format --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f'QUBITS {self.num_qubits}']
        for q in sorted(self.ancilla_init):
            lines.append(f'INIT {q} {self.ancilla_init[q].to_text()}')
        lines.extend(g.to_text() for g in self.gates)
        return '\n'.join(lines) + '\n'

    @classmethod
    def parse(cls, text: str) -> 'Circuit':
        num_qubits: Optional[int] = None
        inits: Dict[int, QubitInit] = {}
        pending: List[Tuple[int, List[str]]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            op = parts[0].upper()
            if op == 'QUBITS':
                num_qubits = _int(parts, 1, lineno)
            elif op == 'INIT':
                if len(parts) != 3:
                    raise CodeFormatError(f'line {lineno}: INIT takes a qubit and a state')
                inits[_int(parts, 1, lineno)] = QubitInit.parse(parts[2])
            else:
                pending.append((lineno, parts))
        if num_qubits is None:
            raise CodeFormatError('missing QUBITS header')
        gates = [_parse_gate(parts, lineno, num_qubits) for lineno, parts in pending]
        return cls(num_qubits, tuple(gates), inits)


def _int(parts: Sequence[str], i: int, lineno: int) -> int:
    try:
        return int(parts[i])
    except (IndexError, ValueError):
        raise CodeFormatError(f'line {lineno}: expected an integer in {" ".join(parts)!r}')


def _parse_gate(parts: List[str], lineno: int, num_qubits: int) -> Gate:
    op = parts[0].upper()
    if op == 'MPP':
        if len(parts) != 2:
            raise CodeFormatError(f'line {lineno}: MPP takes one product, e.g. Z0*Z1')
        return Gate.mpp(PauliString.from_product(parts[1], num_qubits))
    if op == 'RZ':
        if len(parts) != 3:
            raise CodeFormatError(f'line {lineno}: RZ takes an angle and a qubit')
        try:
            angle = float(parts[1])
        except ValueError:
            raise CodeFormatError(f'line {lineno}: bad angle {parts[1]!r}')
        if not math.isfinite(angle):
            raise CodeFormatError(f'line {lineno}: angle must be finite')
        return Gate.rz(angle, _int(parts, 2, lineno))
    arity = _ARITY.get(op)
    if arity is None:
        raise CodeFormatError(f'line {lineno}: unknown gate {parts[0]!r}')
    if len(parts) != arity + 1:
        raise CodeFormatError(f'line {lineno}: {op} takes {arity} qubit(s)')
    return Gate(op, tuple(_int(parts, i, lineno) for i in range(1, arity + 1)))
