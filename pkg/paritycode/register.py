"""
Backend-independent plumbing for physical registers

Both simulators (tableau and state vector) implement the Register protocol, so
circuits, deformation steps and protocols run unchanged on either of them.
Every measurement outcome flows through an Outcomes object: forced values are
consumed first, the seeded generator supplies the rest, and the record it
keeps is exactly what a replay needs to force.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Protocol, Sequence, Tuple

import numpy as np

from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ClassicalParityCode
from paritycode.errors import DimensionError, MeasurementError
from paritycode.pauli import PauliString

logger = logging.getLogger(__name__)


class Register(Protocol):
    backend: str

    @property
    def n(self) -> int: ...

    def apply_gate(self, gate: Gate) -> None: ...

    def apply_pauli(self, pauli: PauliString) -> None: ...

    def measure_pauli(self, pauli: PauliString, forced: Optional[int] = None,
                      rng: Optional[np.random.Generator] = None) -> Tuple[int, bool]: ...

    def peek_pauli(self, pauli: PauliString) -> Optional[int]: ...

    def add_qubit(self, plus: bool = False) -> int: ...

    def discard_qubit(self, qubit: int) -> int: ...

    def copy(self) -> 'Register': ...


@dataclass(frozen=True)
class MeasurementRecord:
    tag: str
    pauli: str
    outcome: int
    deterministic: bool

    def to_dict(self):
        return {'tag': self.tag, 'pauli': self.pauli, 'outcome': self.outcome,
                'deterministic': self.deterministic}


class Outcomes:
    """Measurement outcome source and log."""

    def __init__(self, rng: Optional[np.random.Generator] = None, forced: Optional[Sequence[int]] = None):
        self.rng = rng
        self._forced: List[int] = [int(v) for v in (forced or ())]
        for v in self._forced:
            if v not in (1, -1):
                raise MeasurementError(f'forced outcome {v} is not ±1')
        self.records: List[MeasurementRecord] = []

    @classmethod
    def seeded(cls, seed: int) -> 'Outcomes':
        return cls(np.random.default_rng(seed))

    @property
    def pending_forced(self) -> int:
        return len(self._forced)

    def measure(self, state: Register, pauli: PauliString, tag: str = '') -> int:
        forced = self._forced.pop(0) if self._forced else None
        outcome, deterministic = state.measure_pauli(pauli, forced=forced, rng=self.rng)
        self.records.append(MeasurementRecord(tag, pauli.to_product(), outcome, deterministic))
        logger.debug(f'measured {pauli.to_product()} -> {outcome:+d}{" (deterministic)" if deterministic else ""}')
        return outcome

    @property
    def values(self) -> List[int]:
        return [r.outcome for r in self.records]


def measurement_pauli(gate: Gate, n: int) -> PauliString:
    if gate.name == 'MZ':
        return PauliString.z_on(n, gate.qubits)
    if gate.name == 'MX':
        return PauliString.x_on(n, gate.qubits)
    return gate.pauli


def run_circuit(state: Register, circuit: Circuit, outcomes: Outcomes) -> List[int]:
    """Apply the circuit's gates in order; returns the outcomes of its measurements."""
    if circuit.num_qubits != state.n:
        raise DimensionError(f'circuit on {circuit.num_qubits} qubits, register has {state.n}')
    results = []
    for position, gate in enumerate(circuit.gates):
        if gate.is_measurement:
            results.append(outcomes.measure(state, measurement_pauli(gate, state.n), tag=f'gate {position}'))
        else:
            state.apply_gate(gate)
    return results


class CodeSpaceCheck(NamedTuple):
    passed: bool
    violated: Tuple[int, ...]
    violated_supports: Tuple[Tuple[int, ...], ...]

    def __bool__(self) -> bool:
        return self.passed


def stabilizer_pauli(support: Iterable[int], n: int) -> PauliString:
    return PauliString.z_on(n, support)


def in_code_space(state: Register, code: ClassicalParityCode, excluded: Iterable[int] = ()) -> CodeSpaceCheck:
    """Every (non-excluded) code stabilizer is a deterministic +1; the state is not disturbed."""
    if state.n != code.n:
        raise DimensionError(f'register has {state.n} qubits, code has {code.n}')
    skip = set(excluded)
    violated = tuple(idx for idx, s in enumerate(code.stabilizers)
                     if idx not in skip and state.peek_pauli(stabilizer_pauli(s, state.n)) != 1)
    return CodeSpaceCheck(not violated, violated, tuple(tuple(sorted(code.stabilizers[i])) for i in violated))
