"""
Label extraction from CNOT-based encoding circuits

Conjugating a physical Z through the encoder (C†ZC) tells which input
qubits it acts on. Z factors on |0⟩ ancillas act trivially on the initial
state and are dropped; what remains on the logical inputs is the label.
"""
import logging
from typing import Dict, List, Optional

import numpy as np

from paritycode.circuit import Circuit, Gate, InitKind, ZERO, logical_input
from paritycode.code_model import ClassicalParityCode, LabelAssignment, ParityLabel
from paritycode.errors import CodeFormatError, DimensionError, EncoderError, SeedError, UnsupportedGateError
from paritycode.pauli import PauliString, conjugate_rows

logger = logging.getLogger(__name__)


def _check(c: Circuit, p: PauliString):
    if p.n != c.num_qubits:
        raise DimensionError(f'Pauli on {p.n} qubits, circuit on {c.num_qubits}')
    for gate in c.gates:
        if not gate.is_clifford:
            raise UnsupportedGateError(f'{gate.name} is not a Clifford gate; cannot conjugate through it')


def _conjugate(p: PauliString, gates, inverse: bool) -> PauliString:
    x = p.x.copy()[np.newaxis, :]
    z = p.z.copy()[np.newaxis, :]
    r = np.array([0 if p.sign == 1 else 1], dtype=np.uint8)
    for gate in gates:
        conjugate_rows(x, z, r, gate.name, gate.qubits, inverse=inverse)
    return PauliString(x[0], z[0], -1 if r[0] else 1)


def conjugate_pauli(c: Circuit, p: PauliString) -> PauliString:
    """C† P C (Heisenberg picture), gate by gate from the last gate backwards."""
    _check(c, p)
    return _conjugate(p, reversed(c.gates), inverse=True)


def forward_conjugate(c: Circuit, p: PauliString) -> PauliString:
    """C P C† (Schrödinger picture), the inverse of conjugate_pauli."""
    _check(c, p)
    return _conjugate(p, c.gates, inverse=False)


def _logical_inputs(c: Circuit) -> Dict[int, int]:
    missing = [q for q in range(c.num_qubits) if q not in c.ancilla_init]
    if missing:
        raise CodeFormatError(f'qubits {missing} have no INIT line')
    inputs = c.logical_inputs()
    if sorted(inputs.values()) != list(range(len(inputs))):
        raise CodeFormatError('logical inputs must be numbered consecutively without repeats')
    return inputs


def labels_from_encoding_circuit(c: Circuit) -> LabelAssignment:
    inputs = _logical_inputs(c)
    k = len(inputs)
    labels: List[ParityLabel] = []
    for q in range(c.num_qubits):
        heis = conjugate_pauli(c, PauliString.z_on(c.num_qubits, [q]))
        if heis.x.any():
            raise EncoderError(f'Z on qubit {q} picks up X factors on {list(np.flatnonzero(heis.x))}; '
                               f'not a Z-basis classical encoder')
        indices = []
        for p in np.flatnonzero(heis.z):
            init = c.ancilla_init[int(p)]
            if init.kind is InitKind.ZERO:
                continue
            if init.kind is InitKind.PLUS:
                raise EncoderError(f'Z on qubit {q} reaches the |+⟩ qubit {int(p)}')
            indices.append(inputs[int(p)])
        labels.append(ParityLabel(tuple(indices)))

    try:
        return LabelAssignment(tuple(labels), inputs, k)
    except SeedError:
        # an input qubit was itself overwritten by the encoder
        return LabelAssignment.from_labels(labels, k)


def code_from_encoding_circuit(c: Circuit) -> ClassicalParityCode:
    """Stabilizers are the forward-conjugated Z operators of the |0⟩ ancillas."""
    assignment = labels_from_encoding_circuit(c)
    stabilizers = []
    for q in sorted(c.ancilla_init):
        if c.ancilla_init[q].kind is not InitKind.ZERO:
            continue
        image = forward_conjugate(c, PauliString.z_on(c.num_qubits, [q]))
        if not image.is_z_type():
            raise EncoderError(f'ancilla {q} stabilizer is not Z-type after encoding')
        stabilizers.append(frozenset(int(i) for i in np.flatnonzero(image.z)))
    return ClassicalParityCode(c.num_qubits, assignment.k, tuple(stabilizers), assignment.labels)


def canonical_encoder(code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None) -> Circuit:
    """
    Seeds are the logical inputs; every other qubit starts in |0⟩ and receives
    one CNOT from the seed of each logical index in its label.
    """
    if assignment is None:
        assignment = code.assignment()
    if assignment.n != code.n:
        raise DimensionError(f'assignment covers {assignment.n} qubits, code has {code.n}')
    inits = {}
    gates: List[Gate] = []
    seed_of = {j: q for q, j in assignment.seeds.items()}
    for q in range(code.n):
        if q in assignment.seeds:
            inits[q] = logical_input(assignment.seeds[q])
            continue
        inits[q] = ZERO
        for j in assignment.labels[q]:
            gates.append(Gate.cnot(seed_of[j], q))
    return Circuit(code.n, tuple(gates), inits, {'kind': 'canonical_encoder'})
