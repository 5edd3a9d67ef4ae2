"""
Logical gates on parity codes

* parity-controlled NOT: CNOTs from qubits carrying one control label onto
  the logical-X support of a target logical, transversal or fanned out;
* one-bit teleportation of S and T onto a single (parity) qubit;
* the many-body rotation: duplicate the parity qubit into a protected copy,
  stop checking the stabilizer that connects them, rotate the copy, and
  remove it again.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ClassicalParityCode, LabelAssignment, ParityLabel, logical_x_support
from paritycode.config import config
from paritycode.deformation import PauliFrame, ProtocolTrace, add_parity_qubit, correction_mode, remove_parity_qubit
from paritycode.errors import (BackendError, CodeFormatError, DimensionError, GuardExceededError, LabelError,
                               ProtocolOrderError, UnsupportedGateError)
from paritycode.pauli import PauliString
from paritycode.register import Outcomes, Register, stabilizer_pauli
from paritycode.tableau import clifford_power

logger = logging.getLogger(__name__)

GATE_KINDS = ('pcnot', 'rotation', 'teleport_s', 'teleport_t')
BACKENDS = ('tableau', 'statevector')
_DIAGONAL = frozenset({'S', 'Z', 'RZ'})


@dataclass(frozen=True)
class GateRequest:
    kind: str
    control_label: Optional[ParityLabel] = None
    target_logical: Optional[int] = None
    rotation_label: Optional[ParityLabel] = None
    angle: Optional[float] = None
    backend: str = 'statevector'

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise UnsupportedGateError(f'unknown gate kind {self.kind!r}')
        if self.backend not in BACKENDS:
            raise BackendError(f'unknown backend {self.backend!r}')
        if self.kind == 'pcnot':
            if self.control_label is None or self.control_label.is_empty or self.target_logical is None:
                raise CodeFormatError('pcnot needs a nonempty control label and a target logical')
        if self.kind == 'rotation':
            if self.rotation_label is None or self.rotation_label.is_empty:
                raise CodeFormatError('rotation needs a nonempty label')
            if self.angle is None or not math.isfinite(self.angle):
                raise CodeFormatError(f'rotation angle must be finite, got {self.angle}')
        if self.kind == 'teleport_t' and self.backend == 'tableau':
            raise BackendError('T teleportation needs the state-vector backend')


# ---------------------------------------------------------------------------
# Parity-controlled NOT

@dataclass(frozen=True)
class BlockPair:
    control: ClassicalParityCode
    target: ClassicalParityCode
    control_assignment: Optional[LabelAssignment] = None
    target_assignment: Optional[LabelAssignment] = None

    def __post_init__(self):
        if self.control_assignment is None:
            object.__setattr__(self, 'control_assignment', self.control.assignment())
        if self.target_assignment is None:
            object.__setattr__(self, 'target_assignment', self.target.assignment())

    @property
    def offsets(self) -> Tuple[int, int]:
        return 0, self.control.n

    @property
    def n_total(self) -> int:
        return self.control.n + self.target.n

    @property
    def k_total(self) -> int:
        return self.control.k + self.target.k

    def joint_code(self) -> ClassicalParityCode:
        shift = self.control.n
        stabilizers = self.control.stabilizers + tuple(frozenset(q + shift for q in s)
                                                       for s in self.target.stabilizers)
        return ClassicalParityCode(self.n_total, self.k_total, stabilizers, self.joint_assignment().labels)

    def joint_assignment(self) -> LabelAssignment:
        kc = self.control.k
        labels = self.control_assignment.labels + tuple(ParityLabel(tuple(i + kc for i in label))
                                                        for label in self.target_assignment.labels)
        seeds = dict(self.control_assignment.seeds)
        seeds.update({q + self.control.n: j + kc for q, j in self.target_assignment.seeds.items()})
        return LabelAssignment(labels, seeds, self.k_total)

    def to_dict(self) -> Dict:
        return {'control': self.control.to_dict(), 'target': self.target.to_dict()}

    @classmethod
    def from_dict(cls, data) -> 'BlockPair':
        try:
            return cls(ClassicalParityCode.from_dict(data['control']), ClassicalParityCode.from_dict(data['target']))
        except (KeyError, TypeError):
            raise CodeFormatError('blocks file needs "control" and "target" codes')


def pcnot_circuit(blocks: BlockPair, control_label: ParityLabel, i: int, copies: Optional[int] = None) -> Circuit:
    """
    CNOTs from the control label onto the X support of target logical i.

    ``copies`` is the number of control qubits used: d pairs copy j with the
    j-th target qubit (transversal), 1 fans out from a single control. When
    omitted, the circuit is transversal if enough copies exist.
    """
    controls = blocks.control_assignment.qubits_with(control_label)
    if not controls:
        raise LabelError(f'no control qubit carries label {control_label}')
    if not 0 <= i < blocks.target.k:
        raise DimensionError(f'target logical {i} outside 0..{blocks.target.k - 1}')
    offset = blocks.control.n
    targets = tuple(q + offset for q in logical_x_support(blocks.target_assignment, i))
    d = len(targets)
    if copies is None:
        copies = d if len(controls) >= d else 1

    if copies == d:
        if len(controls) < d:
            raise UnsupportedGateError(f'transversal pcnot needs {d} copies of {control_label}, found {len(controls)}')
        gates = tuple(Gate.cnot(c, t) for c, t in zip(controls, targets))
        transversal = True
    elif copies == 1:
        gates = tuple(Gate.cnot(controls[0], t) for t in targets)
        transversal = False
    else:
        raise UnsupportedGateError(f'{copies} control copies for a weight-{d} target; use 1 or {d}')

    fault_tolerant = transversal or d == 1
    if not fault_tolerant:
        logger.warning(f'pcnot fans out from one control onto {d} target qubits; not fault tolerant')
    metadata = {
        'kind': 'pcnot',
        'control_label': control_label.to_list(),
        'target': i + config.LABEL_BASE,
        'copies': copies,
        'transversal': transversal,
        'fault_tolerant': fault_tolerant,
    }
    return Circuit(blocks.n_total, gates, {}, metadata)


def _basis_bits(j: int, k: int) -> List[int]:
    return [(j >> (k - 1 - b)) & 1 for b in range(k)]


def pcnot_reference_unitary(control_label: ParityLabel, i: int, k_total: int) -> np.ndarray:
    """Permutation flipping logical i whenever the control label has odd parity."""
    if k_total > config.REFERENCE_MAX_K:
        raise GuardExceededError(f'k={k_total} exceeds the reference guard {config.REFERENCE_MAX_K}')
    if not 0 <= i < k_total or any(j >= k_total for j in control_label):
        raise DimensionError(f'indices outside 0..{k_total - 1}')
    if i in control_label:
        raise LabelError(f'target {i} lies inside its own control label {control_label}')
    dim = 2 ** k_total
    u = np.zeros((dim, dim), dtype=complex)
    flip = 1 << (k_total - 1 - i)
    for j in range(dim):
        bits = _basis_bits(j, k_total)
        parity = sum(bits[c] for c in control_label) & 1
        u[j ^ flip if parity else j, j] = 1.0
    return u


# ---------------------------------------------------------------------------
# Teleported S / T

def teleport_diagonal(state: Register, code: ClassicalParityCode, qubit: int, kind: str, outcomes: Outcomes,
                      frame: Optional[PauliFrame] = None) -> ProtocolTrace:
    """
    Teleport S or T onto ``qubit`` through a |+⟩ resource prepared with the
    same gate. The logical effect is a Z rotation by π/2 or π/4 on the
    product of the logicals in the qubit's label.
    """
    kind = kind.upper()
    if kind not in ('S', 'T'):
        raise UnsupportedGateError(f'cannot teleport {kind}')
    if kind == 'T' and state.backend == 'tableau':
        raise BackendError('the tableau backend cannot hold a T resource state')
    if not 0 <= qubit < code.n:
        raise DimensionError(f'qubit {qubit} outside 0..{code.n - 1}')
    if frame is not None:
        frame.flush(state, [qubit])

    trace = ProtocolTrace(metadata={'protocol': 'teleport', 'kind': kind, 'qubit': qubit,
                                    'label': code.labels[qubit].to_list() if code.labels else None})
    start = len(outcomes.records)
    resource = state.add_qubit(plus=True)
    state.apply_gate(Gate.s(resource) if kind == 'S' else Gate.rz(math.pi / 4, resource))
    trace.add('resource', qubit=resource, state=f'{kind}|+>')
    state.apply_gate(Gate.cnot(qubit, resource))
    trace.add('gate', name='CNOT', qubits=[qubit, resource])
    outcome = outcomes.measure(state, PauliString.z_on(state.n, [resource]), tag=f'teleport {kind}')
    trace.add('measure', qubit=resource, basis='Z', outcome=outcome)
    if outcome == -1:
        fix = Gate.z(qubit) if kind == 'S' else Gate.s(qubit)
        state.apply_gate(fix)
        trace.add('correction', name=fix.name, qubits=[qubit])
    state.discard_qubit(resource)
    trace.outcomes = list(outcomes.records[start:])
    logger.debug(f'teleported {kind} onto qubit {qubit}, outcome {outcome:+d}')
    return trace


# ---------------------------------------------------------------------------
# Many-body rotation

class SyndromeRecord(NamedTuple):
    outcomes: Tuple[Tuple[int, int], ...]
    excluded: Tuple[int, ...]

    @property
    def all_plus(self) -> bool:
        return all(v == 1 for _, v in self.outcomes)

    def to_dict(self) -> Dict:
        return {'outcomes': [[i, v] for i, v in self.outcomes], 'excluded': list(self.excluded)}


def syndrome_sweep(state: Register, code: ClassicalParityCode, excluded: Sequence[int], outcomes: Outcomes,
                   frame: Optional[PauliFrame] = None) -> SyndromeRecord:
    """Measure every stabilizer not listed in ``excluded``."""
    if state.n != code.n:
        raise DimensionError(f'register has {state.n} qubits, code has {code.n}')
    skip = set(excluded)
    results = []
    for idx, support in enumerate(code.stabilizers):
        if idx in skip:
            continue
        pauli = stabilizer_pauli(support, state.n)
        value = outcomes.measure(state, pauli, tag=f'sweep {idx}')
        if frame is not None:
            value = frame.adjust(value, pauli)
        results.append((idx, value))
    return SyndromeRecord(tuple(results), tuple(sorted(skip)))


@dataclass(frozen=True)
class RotationOptions:
    copy_size: int = field(default_factory=lambda: config.COPY_SIZE)
    rounds: int = field(default_factory=lambda: config.SYNDROME_ROUNDS)
    gate_sequence: Optional[Tuple[Gate, ...]] = None
    reactivate: bool = False
    correction: Optional[str] = None

    def __post_init__(self):
        if self.copy_size < 1:
            raise DimensionError('the protected copy needs at least one qubit')
        if self.rounds < 0:
            raise DimensionError('syndrome rounds cannot be negative')
        if self.gate_sequence is not None:
            object.__setattr__(self, 'gate_sequence', tuple(self.gate_sequence))
            for gate in self.gate_sequence:
                if gate.is_measurement or gate.qubits != (0,):
                    raise UnsupportedGateError(f'{gate.to_text()!r}: copy sequences hold single-qubit gates on qubit 0')
                if self.copy_size > 1 and gate.name not in _DIAGONAL:
                    raise UnsupportedGateError(f'{gate.name} on a repetition-encoded copy is not supported')


class RotationStage(Enum):
    PREPARED = 'prepared'
    COPY_ADDED = 'copy_added'
    EXCLUDED = 'excluded'
    ROTATED = 'rotated'
    REACTIVATED = 'reactivated'
    REMOVED = 'removed'


class RotationProtocol:
    """
    Step-wise rotation exp(-i α/2 ∏_{i∈label} Z̄_i).

    add_copy -> exclude -> rotate -> [reactivate] -> remove_copy; each step
    checks the stage it is called from.
    """

    def __init__(self, state: Register, code: ClassicalParityCode, label: ParityLabel, alpha: float,
                 options: Optional[RotationOptions] = None, outcomes: Optional[Outcomes] = None,
                 frame: Optional[PauliFrame] = None):
        if not math.isfinite(alpha):
            raise CodeFormatError(f'rotation angle must be finite, got {alpha}')
        self.options = options or RotationOptions()
        carriers = code.assignment().qubits_with(label)
        if not carriers:
            raise LabelError(f'no qubit carries label {label}')
        if state.backend == 'tableau':
            sequence = self.options.gate_sequence or ()
            if any(g.name == 'RZ' and clifford_power(g.angle) is None for g in sequence):
                raise BackendError('the tableau backend runs only Clifford copy sequences')
            if not sequence and clifford_power(alpha) is None:
                raise BackendError(f'α={alpha} is not a multiple of π/2; use the state-vector backend')
        elif code.n + self.options.copy_size > config.ORACLE_MAX_QUBITS:
            raise GuardExceededError(f'{code.n}+{self.options.copy_size} qubits exceed the state-vector guard')

        self.state = state
        self.code = code
        self.label = label
        self.alpha = float(alpha)
        self.parity_qubit = carriers[0]
        self.outcomes = outcomes or Outcomes(np.random.default_rng())
        mode = self.options.correction or config.CORRECTION_MODE
        if frame is None and mode == 'frame':
            frame = PauliFrame(state.n)
        self.mode = correction_mode(mode, frame)
        self.frame = frame
        self.stage = RotationStage.PREPARED
        self.copies: List[int] = []
        self.connecting: Optional[int] = None
        self.excluded: Tuple[int, ...] = ()
        self._record_start = len(self.outcomes.records)
        self.trace = ProtocolTrace(metadata={
            'protocol': 'rotation',
            'label': label.to_list(),
            'alpha': self.alpha,
            'parity_qubit': self.parity_qubit,
            'backend': state.backend,
            'copy_size': self.options.copy_size,
            'rounds': self.options.rounds,
            'correction': self.mode,
            'reactivate': self.options.reactivate,
        })

    def _expect(self, *stages: RotationStage):
        if self.stage not in stages:
            wanted = ' or '.join(s.value for s in stages)
            raise ProtocolOrderError(f'step needs stage {wanted}, protocol is at {self.stage.value}')

    def _sweep(self, tag: str) -> SyndromeRecord:
        record = syndrome_sweep(self.state, self.code, self.excluded, self.outcomes, self.frame)
        self.trace.add('sweep', step=tag, all_plus=record.all_plus, **record.to_dict())
        if not record.all_plus:
            logger.warning(f'{tag}: syndrome {record.outcomes} not all +1')
        return record

    def add_copy(self):
        """Step 1: a protected copy of the parity qubit, checked for ``rounds`` sweeps."""
        self._expect(RotationStage.PREPARED)
        previous = self.parity_qubit
        for _ in range(self.options.copy_size):
            self.code, step = add_parity_qubit(self.state, self.code, self.label, [previous], self.outcomes,
                                               self.mode, self.frame)
            self.trace.add('add', **step.to_dict())
            if self.connecting is None:
                self.connecting = self.code.num_stabilizers - 1
            self.copies.append(step.qubit)
            previous = step.qubit
        for r in range(self.options.rounds):
            self._sweep(f'trust round {r + 1}')
        self.stage = RotationStage.COPY_ADDED

    def exclude(self):
        """Step 2: stop checking the connecting stabilizer."""
        self._expect(RotationStage.COPY_ADDED)
        self.excluded = (self.connecting,)
        self.trace.add('exclude', stabilizer=self.connecting,
                       support=sorted(self.code.stabilizers[self.connecting]))
        self.stage = RotationStage.EXCLUDED

    def _copy_gates(self) -> Tuple[Gate, ...]:
        head = self.copies[0]
        if self.options.gate_sequence is not None:
            return tuple(g.remapped({0: head}) for g in self.options.gate_sequence)
        if self.alpha == 0:
            return ()
        return (Gate.rz(self.alpha, head),)

    def rotate(self):
        """Step 3: rotate the copy; every remaining stabilizer is swept after each gate."""
        self._expect(RotationStage.EXCLUDED)
        if self.frame is not None:
            self.frame.flush(self.state, self.copies)
        for gate in self._copy_gates():
            self.state.apply_gate(gate)
            self.trace.add('gate', name=gate.name, qubits=list(gate.qubits), angle=gate.angle)
            self._sweep(f'after {gate.name}')
        self.stage = RotationStage.ROTATED

    def reactivate(self):
        """Optional: measure the connecting stabilizer again before removal."""
        self._expect(RotationStage.ROTATED)
        support = self.code.stabilizers[self.connecting]
        pauli = stabilizer_pauli(support, self.state.n)
        value = self.outcomes.measure(self.state, pauli, tag='reactivate')
        if self.frame is not None:
            value = self.frame.adjust(value, pauli)
        corrected: List[int] = []
        if value == -1:
            # X on the whole copy flips only the connecting stabilizer
            self.state.apply_pauli(PauliString.x_on(self.state.n, self.copies))
            corrected = list(self.copies)
        self.excluded = ()
        self.trace.add('reactivate', stabilizer=self.connecting, outcome=value, correction=corrected)
        self.stage = RotationStage.REACTIVATED

    def remove_copy(self):
        """Step 4: measure out the copy, last chain qubit first."""
        self._expect(RotationStage.ROTATED, RotationStage.REACTIVATED)
        chain = [self.parity_qubit] + self.copies
        for position in range(len(chain) - 1, 0, -1):
            qubit, partner = chain[position], chain[position - 1]
            linking = self.code.stabilizers.index(frozenset({partner, qubit}))
            self.code, step = remove_parity_qubit(self.state, self.code, qubit, self.outcomes,
                                                  self.mode, self.frame, linking=linking)
            self.trace.add('remove', **step.to_dict())
        self.copies = []
        self.excluded = ()
        self.stage = RotationStage.REMOVED

    def finish(self) -> ProtocolTrace:
        self._expect(RotationStage.REMOVED)
        if self.frame is not None and not self.frame.is_clear():
            self.trace.add('frame_flush', **self.frame.to_dict())
            self.frame.apply(self.state)
        self.trace.outcomes = list(self.outcomes.records[self._record_start:])
        return self.trace

    def run(self) -> ProtocolTrace:
        self.add_copy()
        self.exclude()
        self.rotate()
        if self.options.reactivate:
            self.reactivate()
        self.remove_copy()
        return self.finish()


def rotation_protocol(state: Register, code: ClassicalParityCode, label: ParityLabel, alpha: float,
                      options: Optional[RotationOptions] = None, outcomes: Optional[Outcomes] = None,
                      frame: Optional[PauliFrame] = None) -> ProtocolTrace:
    trace = RotationProtocol(state, code, label, alpha, options, outcomes, frame).run()
    logger.debug(f'rotation by {alpha} on {label}: {len(trace.events)} events')
    return trace
