"""
Dense state-vector oracle

A StateVector holds a batch of m columns over n qubits as a tensor of shape
(2,)*n + (m,); qubit 0 is the most significant bit of the flattened index.
Protocols run on the whole batch at once: measurement outcomes are shared by
all columns, and the batch is renormalized as a block, so when an outcome's
probability does not depend on the encoded input every column stays a unit
vector and the block evolves by one (scaled) linear map.
"""
import logging
import math
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ClassicalParityCode, LabelAssignment, ParityLabel
from paritycode.config import config
from paritycode.errors import (DimensionError, GuardExceededError, MeasurementError, NormUnderflowError,
                               UnsupportedGateError)
from paritycode.flow_tracking import canonical_encoder
from paritycode.pauli import PauliString
from paritycode.register import Outcomes
from paritycode.register import run_circuit as _run_on_register

logger = logging.getLogger(__name__)

_SQRT2_INV = 1 / math.sqrt(2)
_MATRICES = {
    'H': np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    'S': np.array([[1, 0], [0, 1j]], dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def rz_matrix(angle: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex)


def _guard(n: int):
    if n > config.ORACLE_MAX_QUBITS:
        raise GuardExceededError(f'{n} qubits exceed the state-vector guard of {config.ORACLE_MAX_QUBITS}')


class StateVector:
    backend = 'statevector'

    def __init__(self, n: int, amplitudes: Optional[np.ndarray] = None, columns: int = 1):
        if n < 1:
            raise DimensionError('a state vector needs at least one qubit')
        _guard(n)
        if amplitudes is None:
            data = np.zeros((2 ** n, columns), dtype=complex)
            data[0, :] = 1.0
        else:
            data = np.asarray(amplitudes, dtype=complex)
            if data.ndim == 1:
                data = data[:, np.newaxis]
            if data.shape[0] != 2 ** n:
                raise DimensionError(f'{data.shape[0]} amplitudes for {n} qubits')
            data = data.copy()
        self._n = n
        self._data = data.reshape((2,) * n + (data.shape[1],))

    @property
    def n(self) -> int:
        return self._n

    @property
    def columns(self) -> int:
        return self._data.shape[-1]

    @property
    def amplitudes(self) -> np.ndarray:
        """(2^n, m) matrix view of the batch."""
        return self._data.reshape(2 ** self._n, self.columns)

    def vector(self, column: int = 0) -> np.ndarray:
        return self.amplitudes[:, column].copy()

    def copy(self) -> 'StateVector':
        return StateVector(self._n, self.amplitudes.copy())

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=0)

    # -- gates --------------------------------------------------------------

    def _apply_1q(self, matrix: np.ndarray, q: int):
        moved = np.tensordot(matrix, self._data, axes=([1], [q]))
        self._data = np.moveaxis(moved, 0, q)

    def _apply_cnot(self, c: int, t: int):
        data = self._data.copy()
        index = [slice(None)] * data.ndim
        index[c] = 1
        sub = data[tuple(index)]
        axis = t if t < c else t - 1
        data[tuple(index)] = np.flip(sub, axis=axis)
        self._data = data

    def apply_gate(self, gate: Gate):
        if gate.is_measurement:
            raise UnsupportedGateError(f'{gate.name} is a measurement; use measure_pauli or run_circuit')
        for q in gate.qubits:
            if not 0 <= q < self._n:
                raise DimensionError(f'qubit {q} outside register of {self._n}')
        if gate.name == 'CNOT':
            self._apply_cnot(*gate.qubits)
        elif gate.name == 'RZ':
            self._apply_1q(rz_matrix(gate.angle), gate.qubits[0])
        elif gate.name in _MATRICES:
            self._apply_1q(_MATRICES[gate.name], gate.qubits[0])
        else:
            raise UnsupportedGateError(f'unknown gate {gate.name}')

    def _pauli_image(self, pauli: PauliString) -> np.ndarray:
        if pauli.n != self._n:
            raise DimensionError(f'Pauli on {pauli.n} qubits, register has {self._n}')
        data = self._data.copy()
        for q in range(self._n):
            xq, zq = int(pauli.x[q]), int(pauli.z[q])
            if zq:
                index = [slice(None)] * data.ndim
                index[q] = 1
                data[tuple(index)] *= -1
            if xq:
                data = np.flip(data, axis=q)
        num_y = int(np.count_nonzero(pauli.x & pauli.z))
        return data * ((1j) ** num_y * pauli.sign)

    def apply_pauli(self, pauli: PauliString):
        self._data = self._pauli_image(pauli)

    # -- measurement --------------------------------------------------------

    def _total_weight(self) -> float:
        return float(np.sum(np.abs(self._data) ** 2))

    def probability(self, pauli: PauliString, outcome: int = 1) -> float:
        """Probability of reading ``outcome`` for ``pauli`` (pooled over the batch)."""
        image = self._pauli_image(pauli)
        projected = (self._data + outcome * image) / 2
        return float(np.sum(np.abs(projected) ** 2)) / self._total_weight()

    def expectation(self, pauli: PauliString) -> float:
        image = self._pauli_image(pauli)
        return float(np.real(np.vdot(self._data, image))) / self._total_weight()

    def peek_pauli(self, pauli: PauliString) -> Optional[int]:
        value = self.expectation(pauli)
        if abs(value - 1) < config.DETERMINISM_TOLERANCE:
            return 1
        if abs(value + 1) < config.DETERMINISM_TOLERANCE:
            return -1
        return None

    def measure_pauli(self, pauli: PauliString, forced: Optional[int] = None,
                      rng: Optional[np.random.Generator] = None) -> Tuple[int, bool]:
        if forced is not None and forced not in (1, -1):
            raise MeasurementError(f'forced outcome {forced} is not ±1')
        image = self._pauli_image(pauli)
        total = self._total_weight()
        plus = (self._data + image) / 2
        p_plus = float(np.sum(np.abs(plus) ** 2)) / total
        deterministic = p_plus > 1 - config.DETERMINISM_TOLERANCE or p_plus < config.DETERMINISM_TOLERANCE

        if forced is not None:
            outcome = forced
        elif deterministic:
            outcome = 1 if p_plus > 0.5 else -1
        elif rng is not None:
            outcome = 1 if rng.random() < p_plus else -1
        else:
            raise MeasurementError(f'{pauli.to_product()} has a random outcome but neither rng nor forced value given')

        p_outcome = p_plus if outcome == 1 else 1 - p_plus
        if p_outcome < config.NORM_TOLERANCE:
            raise NormUnderflowError(f'outcome {outcome:+d} of {pauli.to_product()} has probability {p_outcome:.3g}')
        projected = plus if outcome == 1 else (self._data - image) / 2
        self._data = projected / math.sqrt(p_outcome)
        return outcome, deterministic

    # -- register size ------------------------------------------------------

    def add_qubit(self, plus: bool = False) -> int:
        _guard(self._n + 1)
        if plus:
            data = np.stack([self._data, self._data], axis=self._n) * _SQRT2_INV
        else:
            data = np.stack([self._data, np.zeros_like(self._data)], axis=self._n)
        self._data = data
        self._n += 1
        return self._n - 1

    def discard_qubit(self, qubit: int) -> int:
        """Drop a qubit sitting in a Z or X eigenstate; returns its eigenvalue."""
        if not 0 <= qubit < self._n:
            raise DimensionError(f'qubit {qubit} outside register of {self._n}')
        if self._n == 1:
            raise DimensionError('cannot discard the last qubit')
        value = self.peek_pauli(PauliString.z_on(self._n, [qubit]))
        if value is not None:
            self._data = np.take(self._data, 0 if value == 1 else 1, axis=qubit)
        else:
            value = self.peek_pauli(PauliString.x_on(self._n, [qubit]))
            if value is None:
                raise MeasurementError(f'qubit {qubit} is entangled; measure it before discarding')
            zero = np.take(self._data, 0, axis=qubit)
            one = np.take(self._data, 1, axis=qubit)
            self._data = (zero + value * one) * _SQRT2_INV
        self._n -= 1
        return value


class LogicalActionReport(NamedTuple):
    logical_unitary: np.ndarray
    block_preserving: bool
    leakage: float


def run_circuit(sv: StateVector, c: Circuit, rng: Optional[np.random.Generator] = None,
                outcomes: Optional[Outcomes] = None) -> Tuple[StateVector, list]:
    """Run c in place; returns the state and the measurement record."""
    _guard(c.num_qubits)
    outcomes = outcomes or Outcomes(rng)
    results = _run_on_register(sv, c, outcomes)
    return sv, results


def _basis_bits(j: int, k: int) -> Tuple[int, ...]:
    # logical 0 is the most significant bit
    return tuple((j >> (k - 1 - i)) & 1 for i in range(k))


def encoded_basis(code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None) -> StateVector:
    """Batch whose column j is the encoded logical basis state |j⟩."""
    assignment = assignment or code.assignment()
    _guard(code.n)
    k = code.k
    data = np.zeros((2 ** code.n, 2 ** k), dtype=complex)
    for j in range(2 ** k):
        bits = _basis_bits(j, k)
        physical = [0] * code.n
        for q, i in assignment.seeds.items():
            physical[q] = bits[i]
        data[int(''.join(str(b) for b in physical), 2), j] = 1.0
    sv = StateVector(code.n, data)
    for gate in canonical_encoder(code, assignment).gates:
        sv.apply_gate(gate)
    return sv


def encoding_isometry(code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None) -> np.ndarray:
    """E with E|j⟩ = encoded basis state j; shape (2^n, 2^k)."""
    return encoded_basis(code, assignment).amplitudes.copy()


def _report(psi: np.ndarray, e_out: np.ndarray) -> LogicalActionReport:
    logical = e_out.conj().T @ psi
    residual = psi - e_out @ logical
    leakage = float(np.max(np.linalg.norm(residual, axis=0))) if residual.size else 0.0
    return LogicalActionReport(logical, leakage <= config.LEAKAGE_TOLERANCE, leakage)


def logical_action(code: ClassicalParityCode, assignment: Optional[LabelAssignment],
                   physical_circuit: Circuit) -> LogicalActionReport:
    """E† U E for a measurement-free physical circuit U."""
    if physical_circuit.has_measurements():
        raise UnsupportedGateError('circuits with measurements go through protocol_logical_action')
    if physical_circuit.num_qubits != code.n:
        raise DimensionError(f'circuit on {physical_circuit.num_qubits} qubits, code has {code.n}')
    assignment = assignment or code.assignment()
    sv = encoded_basis(code, assignment)
    e = sv.amplitudes.copy()
    for gate in physical_circuit.gates:
        sv.apply_gate(gate)
    return _report(sv.amplitudes, e)


def protocol_logical_action(code: ClassicalParityCode, assignment: Optional[LabelAssignment],
                            evolve: Callable[[StateVector], Tuple[ClassicalParityCode, Optional[LabelAssignment]]]
                            ) -> LogicalActionReport:
    """
    Logical action of a measured protocol.

    ``evolve`` runs the protocol on the encoded basis batch (in place) and
    returns the code, and optionally the assignment, the register ends in.
    """
    sv = encoded_basis(code, assignment)
    code_out, assignment_out = evolve(sv)
    if sv.n != code_out.n:
        raise DimensionError(f'protocol left {sv.n} qubits for a {code_out.n}-qubit code')
    e_out = encoding_isometry(code_out, assignment_out)
    return _report(sv.amplitudes, e_out)


def fidelity_up_to_phase(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U†V)| / dim."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f'cannot compare {u.shape} with {v.shape}')
    return float(min(1.0, abs(np.trace(u.conj().T @ v)) / u.shape[0]))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise DimensionError(f'cannot compare states of size {a.size} and {b.size}')
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def rotation_unitary(label: ParityLabel, alpha: float, k: int) -> np.ndarray:
    """exp(-i α/2 ∏_{i∈label} Z̄_i) on k logical qubits."""
    if any(i >= k for i in label):
        raise DimensionError(f'label {label} outside {k} logical qubits')
    diag = np.empty(2 ** k, dtype=complex)
    for j in range(2 ** k):
        bits = _basis_bits(j, k)
        parity = sum(bits[i] for i in label) & 1
        diag[j] = np.exp(-0.5j * alpha * (-1 if parity else 1))
    return np.diag(diag)


def statevector_from_tableau(tableau, seed: int = 0, attempts: int = 8) -> StateVector:
    """Dense vector of a stabilizer state: a seeded random vector projected onto its stabilizers."""
    _guard(tableau.n)
    rng = np.random.default_rng(seed)
    stabilizers = tableau.stabilizers()
    for _ in range(attempts):
        raw = rng.normal(size=2 ** tableau.n) + 1j * rng.normal(size=2 ** tableau.n)
        sv = StateVector(tableau.n, raw / np.linalg.norm(raw))
        for s in stabilizers:
            sv._data = (sv._data + sv._pauli_image(s)) / 2
        norm = np.linalg.norm(sv.amplitudes)
        if norm > 1e-6:
            sv._data = sv._data / norm
            return sv
    raise MeasurementError('random projection kept missing the stabilizer state')


def basis_state(bits: Sequence[int]) -> StateVector:
    n = len(bits)
    data = np.zeros(2 ** n, dtype=complex)
    data[int(''.join(str(int(b)) for b in bits), 2)] = 1.0
    return StateVector(n, data)
