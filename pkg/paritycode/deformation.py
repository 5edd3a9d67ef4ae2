"""
Measurement-based code deformation

Parity qubits are added by preparing |+⟩ and measuring the new Z-stabilizer,
and removed by measuring X. Corrections are applied physically or recorded
in a PauliFrame, selected per call or by ``config.CORRECTION_MODE``.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from paritycode.code_model import ClassicalParityCode, ParityLabel, label_of_z
from paritycode.config import config
from paritycode.errors import DeformationError, DimensionError
from paritycode.pauli import PauliString
from paritycode.register import MeasurementRecord, Outcomes, Register

logger = logging.getLogger(__name__)

CORRECTION_MODES = ('physical', 'frame')


class PauliFrame:
    """Pending X and Z corrections, one bit pair per qubit."""

    def __init__(self, n: int):
        self.x = np.zeros(n, dtype=np.uint8)
        self.z = np.zeros(n, dtype=np.uint8)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def record_x(self, qubits: Iterable[int]):
        for q in qubits:
            self.x[q] ^= 1

    def record_z(self, qubits: Iterable[int]):
        for q in qubits:
            self.z[q] ^= 1

    def compose(self, other: 'PauliFrame') -> 'PauliFrame':
        if other.n != self.n:
            raise DimensionError(f'frames on {self.n} and {other.n} qubits')
        out = PauliFrame(self.n)
        out.x = self.x ^ other.x
        out.z = self.z ^ other.z
        return out

    def as_pauli(self) -> PauliString:
        return PauliString(self.x, self.z)

    def is_clear(self) -> bool:
        return not (self.x.any() or self.z.any())

    def adjust(self, outcome: int, pauli: PauliString) -> int:
        """Outcome the frame-corrected state would have given."""
        return -outcome if not self.as_pauli().commutes(pauli) else outcome

    def flush(self, state: Register, qubits: Optional[Iterable[int]] = None):
        """Apply pending corrections (all, or on ``qubits``) physically and clear them."""
        mask = np.zeros(self.n, dtype=np.uint8)
        mask[list(range(self.n)) if qubits is None else list(qubits)] = 1
        pending = PauliString(self.x & mask, self.z & mask)
        if not pending.is_identity():
            state.apply_pauli(pending)
            logger.debug(f'frame flushed {pending.to_product()}')
        self.x &= mask ^ 1
        self.z &= mask ^ 1

    def apply(self, state: Register):
        self.flush(state)

    def extend(self) -> int:
        self.x = np.append(self.x, np.uint8(0))
        self.z = np.append(self.z, np.uint8(0))
        return self.n - 1

    def drop(self, qubit: int):
        self.x = np.delete(self.x, qubit)
        self.z = np.delete(self.z, qubit)

    def to_dict(self) -> Dict[str, List[int]]:
        return {'x': [int(q) for q in np.flatnonzero(self.x)], 'z': [int(q) for q in np.flatnonzero(self.z)]}


@dataclass(frozen=True)
class DeformationStep:
    kind: str
    qubit: int
    label: ParityLabel
    connecting_stabilizer: Tuple[int, ...]
    outcome: int
    frame_delta: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)
    correction: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'qubit': self.qubit,
            'label': self.label.to_list(),
            'connecting_stabilizer': list(self.connecting_stabilizer),
            'outcome': self.outcome,
            'frame_delta': {k: list(v) for k, v in self.frame_delta.items()},
            'correction': list(self.correction),
        }


@dataclass
class TraceEvent:
    kind: str
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {'kind': self.kind}
        out.update(self.data)
        return out


@dataclass
class ProtocolTrace:
    events: List[TraceEvent] = field(default_factory=list)
    outcomes: List[MeasurementRecord] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, kind: str, /, **data):
        self.events.append(TraceEvent(kind, data))

    def kinds(self) -> List[str]:
        return [e.kind for e in self.events]

    def forced_outcomes(self) -> List[int]:
        """Outcome list that replays this run through Outcomes(forced=...)."""
        return [r.outcome for r in self.outcomes]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'metadata': dict(self.metadata),
            'events': [e.to_dict() for e in self.events],
            'outcomes': [r.to_dict() for r in self.outcomes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def compose_traces(*traces: ProtocolTrace) -> ProtocolTrace:
    """Merge traces of runs on disjoint regions; events keep their region index."""
    merged = ProtocolTrace(metadata={'regions': [dict(t.metadata) for t in traces]})
    for region, trace in enumerate(traces):
        for event in trace.events:
            merged.events.append(TraceEvent(event.kind, dict(event.data, region=region)))
        merged.outcomes.extend(trace.outcomes)
    return merged


def correction_mode(correction: Optional[str], frame: Optional[PauliFrame]) -> str:
    mode = correction or config.CORRECTION_MODE
    if mode not in CORRECTION_MODES:
        raise DeformationError(f'unknown correction mode {mode!r}')
    if mode == 'frame' and frame is None:
        raise DeformationError('frame corrections need a PauliFrame')
    return mode


def _measure(state: Register, pauli: PauliString, outcomes: Outcomes, frame: Optional[PauliFrame], tag: str) -> int:
    outcome = outcomes.measure(state, pauli, tag)
    return frame.adjust(outcome, pauli) if frame is not None else outcome


def add_parity_qubit(state: Register, code: ClassicalParityCode, label: ParityLabel, partners: Iterable[int],
                     outcomes: Outcomes, correction: Optional[str] = None, frame: Optional[PauliFrame] = None,
                     coord: Optional[Tuple[int, int]] = None) -> Tuple[ClassicalParityCode, DeformationStep]:
    """Append a qubit carrying ``label`` and join it to ``partners`` with a new stabilizer."""
    mode = correction_mode(correction, frame)
    partners = tuple(sorted(set(int(q) for q in partners)))
    if not partners:
        raise DeformationError('a new parity qubit needs at least one partner')
    if state.n != code.n:
        raise DimensionError(f'register has {state.n} qubits, code has {code.n}')
    for q in partners:
        if not 0 <= q < code.n:
            raise DeformationError(f'partner {q} outside 0..{code.n - 1}')
    assignment = code.assignment()
    expected = label_of_z(assignment, partners)
    if expected != label:
        raise DeformationError(f'label {label} does not match the partners\' parity {expected}')

    new = state.add_qubit(plus=True)
    if frame is not None:
        frame.extend()
    support = partners + (new,)
    stabilizer = PauliString.z_on(state.n, support)
    outcome = _measure(state, stabilizer, outcomes, frame, tag=f'add {new}')

    corrected: Tuple[int, ...] = ()
    delta: Dict[str, Tuple[int, ...]] = {}
    if outcome == -1:
        if mode == 'physical':
            state.apply_pauli(PauliString.x_on(state.n, [new]))
            corrected = (new,)
        else:
            frame.record_x([new])
            delta = {'x': (new,)}
    logger.debug(f'added qubit {new} with label {label}, stabilizer {list(support)}, outcome {outcome:+d}')

    coords = None
    if code.coords is not None:
        if coord is None:
            points = np.array([code.coords[q] for q in partners])
            coord = tuple(int(v) for v in np.rint(points.mean(axis=0)))
        coords = code.coords + (tuple(coord),)
    new_code = ClassicalParityCode(code.n + 1, code.k, code.stabilizers + (frozenset(support),),
                                   code.labels + (label,), coords)
    return new_code, DeformationStep('add', new, label, support, outcome, delta, corrected)


def rebase_stabilizers(code: ClassicalParityCode, qubit: int, linking: int) -> Tuple[frozenset, ...]:
    """Multiply every other stabilizer touching ``qubit`` by the linking one; the linking one stays in place."""
    if not 0 <= linking < code.num_stabilizers:
        raise DeformationError(f'no stabilizer {linking}')
    link = code.stabilizers[linking]
    if qubit not in link:
        raise DeformationError(f'stabilizer {linking} {sorted(link)} does not contain qubit {qubit}')
    return tuple(s ^ link if idx != linking and qubit in s else s for idx, s in enumerate(code.stabilizers))


def _drop_index(values: Sequence, qubit: int) -> Tuple:
    return tuple(v for q, v in enumerate(values) if q != qubit)


def remove_parity_qubit(state: Register, code: ClassicalParityCode, qubit: int, outcomes: Outcomes,
                        correction: Optional[str] = None, frame: Optional[PauliFrame] = None,
                        linking: Optional[int] = None) -> Tuple[ClassicalParityCode, DeformationStep]:
    """Measure ``qubit`` in X and drop it together with its linking stabilizer."""
    mode = correction_mode(correction, frame)
    if state.n != code.n:
        raise DimensionError(f'register has {state.n} qubits, code has {code.n}')
    if not 0 <= qubit < code.n:
        raise DeformationError(f'qubit {qubit} outside 0..{code.n - 1}')
    containing = [idx for idx, s in enumerate(code.stabilizers) if qubit in s]
    if not containing:
        raise DeformationError(f'qubit {qubit} is in no stabilizer; removing it would change k')
    label = code.labels[qubit]
    if label.is_base and sum(1 for lab in code.labels if lab == label) == 1:
        raise DeformationError(f'qubit {qubit} is the only carrier of base label {label}')
    if linking is None:
        linking = containing[0]

    stabilizers = rebase_stabilizers(code, qubit, linking)
    link = stabilizers[linking]
    outcome = _measure(state, PauliString.x_on(state.n, [qubit]), outcomes, frame, tag=f'remove {qubit}')

    rest = tuple(sorted(link - {qubit}))
    corrected: Tuple[int, ...] = ()
    delta: Dict[str, Tuple[int, ...]] = {}
    if outcome == -1:
        if mode == 'physical':
            state.apply_pauli(PauliString.z_on(state.n, rest))
            corrected = rest
        else:
            frame.record_z(rest)
            delta = {'z': rest}
    state.discard_qubit(qubit)
    if frame is not None:
        frame.drop(qubit)
    logger.debug(f'removed qubit {qubit} via stabilizer {sorted(link)}, outcome {outcome:+d}')

    def shift(q: int) -> int:
        return q - 1 if q > qubit else q

    kept = tuple(frozenset(shift(q) for q in s) for idx, s in enumerate(stabilizers) if idx != linking)
    coords = None if code.coords is None else _drop_index(code.coords, qubit)
    new_code = ClassicalParityCode(code.n - 1, code.k, kept, _drop_index(code.labels, qubit), coords)
    return new_code, DeformationStep('remove', qubit, label, tuple(sorted(link)), outcome, delta, corrected)
