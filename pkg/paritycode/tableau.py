"""
Stabilizer tableau simulator

Rows 0..n-1 hold destabilizers and rows n..2n-1 stabilizers, each as (x, z)
bit rows plus a sign bit. Gate updates are the shared Clifford rules from
paritycode.pauli; measurement follows the destabilizer method, so the sign of
a deterministic outcome is read off without Gaussian elimination.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from paritycode import gf2
from paritycode.circuit import Gate
from paritycode.code_model import ClassicalParityCode, LabelAssignment
from paritycode.config import config
from paritycode.errors import BackendError, DimensionError, LabelError, MeasurementError, UnsupportedGateError
from paritycode.flow_tracking import canonical_encoder
from paritycode.gf2 import BitMatrix, BitVector
from paritycode.pauli import PauliString, conjugate_rows, phase_exponents, rowsum, symplectic_products, unstack

logger = logging.getLogger(__name__)

_QUARTER = math.pi / 2


def clifford_power(angle: float, tol: float = 1e-9) -> Optional[int]:
    """m with RZ(angle) = S^m up to phase, or None when angle is not a multiple of π/2."""
    m = round(angle / _QUARTER)
    if abs(angle - m * _QUARTER) > tol:
        return None
    return m % 4


class StabilizerTableau:
    backend = 'tableau'

    def __init__(self, n: int):
        if n < 1:
            raise DimensionError('a tableau needs at least one qubit')
        self._n = n
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        self.x = np.vstack([eye, zero])
        self.z = np.vstack([zero, eye])
        self.r = np.zeros(2 * n, dtype=np.uint8)

    @property
    def n(self) -> int:
        return self._n

    def copy(self) -> 'StabilizerTableau':
        other = StabilizerTableau.__new__(StabilizerTableau)
        other._n = self._n
        other.x, other.z, other.r = self.x.copy(), self.z.copy(), self.r.copy()
        return other

    # -- gates --------------------------------------------------------------

    def apply_gate(self, gate: Gate):
        if gate.is_measurement:
            raise UnsupportedGateError(f'{gate.name} is a measurement; use measure_pauli or run_circuit')
        for q in gate.qubits:
            if not 0 <= q < self._n:
                raise DimensionError(f'qubit {q} outside tableau of {self._n}')
        if gate.name == 'RZ':
            power = clifford_power(gate.angle)
            if power is None:
                raise UnsupportedGateError(f'RZ({gate.angle}) is not a Clifford rotation')
            for _ in range(power):
                conjugate_rows(self.x, self.z, self.r, 'S', gate.qubits)
        else:
            conjugate_rows(self.x, self.z, self.r, gate.name, gate.qubits)
        self._maybe_check()

    def apply_pauli(self, pauli: PauliString):
        self._check_size(pauli)
        # P flips the sign of every row it anticommutes with
        self.r ^= symplectic_products(self.x, self.z, pauli.x, pauli.z)

    # -- measurement --------------------------------------------------------

    def _check_size(self, pauli: PauliString):
        if pauli.n != self._n:
            raise DimensionError(f'Pauli on {pauli.n} qubits, tableau has {self._n}')

    def _deterministic_value(self, pauli: PauliString) -> int:
        """Eigenvalue of a Pauli that commutes with every stabilizer."""
        n = self._n
        coefficients = np.flatnonzero(symplectic_products(self.x[:n], self.z[:n], pauli.x, pauli.z))
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        sr = 0
        for i in coefficients:
            row = n + int(i)
            total = 2 * sr + 2 * int(self.r[row]) + int(phase_exponents(self.x[row], self.z[row], sx, sz))
            sr = (total % 4) // 2
            sx ^= self.x[row]
            sz ^= self.z[row]
        if not (np.array_equal(sx, pauli.x) and np.array_equal(sz, pauli.z)):
            raise BackendError('tableau lost full rank: commuting Pauli is not in the stabilizer group')
        return pauli.sign * (-1 if sr else 1)

    def peek_pauli(self, pauli: PauliString) -> Optional[int]:
        self._check_size(pauli)
        if symplectic_products(self.x[self._n:], self.z[self._n:], pauli.x, pauli.z).any():
            return None
        return self._deterministic_value(pauli)

    def measure_pauli(self, pauli: PauliString, forced: Optional[int] = None,
                      rng: Optional[np.random.Generator] = None) -> Tuple[int, bool]:
        self._check_size(pauli)
        if forced is not None and forced not in (1, -1):
            raise MeasurementError(f'forced outcome {forced} is not ±1')
        n = self._n
        anti = symplectic_products(self.x, self.z, pauli.x, pauli.z)
        stab_anti = np.flatnonzero(anti[n:])
        if stab_anti.size == 0:
            outcome = self._deterministic_value(pauli)
            if forced is not None and forced != outcome:
                raise MeasurementError(f'{pauli.to_product()} is deterministically {outcome:+d}, forced {forced:+d}')
            return outcome, True

        if forced is not None:
            outcome = forced
        elif rng is not None:
            outcome = 1 if rng.integers(2) == 0 else -1
        else:
            raise MeasurementError(f'{pauli.to_product()} has a random outcome but neither rng nor forced value given')

        pivot = n + int(stab_anti[0])
        targets = np.flatnonzero(anti)
        targets = targets[targets != pivot]
        rowsum(self.x, self.z, self.r, targets, pivot)
        destab = pivot - n
        self.x[destab], self.z[destab], self.r[destab] = self.x[pivot], self.z[pivot], self.r[pivot]
        self.x[pivot] = pauli.x
        self.z[pivot] = pauli.z
        self.r[pivot] = 0 if outcome * pauli.sign == 1 else 1
        self._maybe_check()
        return outcome, False

    # -- register size ------------------------------------------------------

    def add_qubit(self, plus: bool = False) -> int:
        """Append a fresh qubit in |0⟩ (or |+⟩); returns its index."""
        n = self._n
        x = np.zeros((2 * n + 2, n + 1), dtype=np.uint8)
        z = np.zeros((2 * n + 2, n + 1), dtype=np.uint8)
        r = np.zeros(2 * n + 2, dtype=np.uint8)
        x[:n, :n], z[:n, :n], r[:n] = self.x[:n], self.z[:n], self.r[:n]
        x[n + 1:2 * n + 1, :n], z[n + 1:2 * n + 1, :n], r[n + 1:2 * n + 1] = self.x[n:], self.z[n:], self.r[n:]
        if plus:
            z[n, n] = 1
            x[2 * n + 1, n] = 1
        else:
            x[n, n] = 1
            z[2 * n + 1, n] = 1
        self.x, self.z, self.r = x, z, r
        self._n = n + 1
        self._maybe_check()
        return n

    def discard_qubit(self, qubit: int) -> int:
        """
        Drop a qubit that sits in a Z or X eigenstate, unentangled from the rest.
        Returns its eigenvalue; higher qubit indices shift down by one.
        """
        n = self._n
        if not 0 <= qubit < n:
            raise DimensionError(f'qubit {qubit} outside tableau of {n}')
        if n == 1:
            raise DimensionError('cannot discard the last qubit')
        local = None
        for maker in (PauliString.z_on, PauliString.x_on):
            candidate = maker(n, [qubit])
            value = self.peek_pauli(candidate)
            if value is not None:
                local = candidate
                break
        if local is None:
            raise MeasurementError(f'qubit {qubit} is entangled; measure it before discarding')

        rows = np.arange(n, 2 * n)
        touching = rows[(self.x[n:, qubit] | self.z[n:, qubit]).astype(bool)]
        pivot = int(touching[0])
        rowsum(self.x, self.z, self.r, touching[1:], pivot)
        self.x[pivot] = local.x
        self.z[pivot] = local.z
        self.r[pivot] = 0 if value == 1 else 1

        keep_rows = [i for i in range(n, 2 * n) if i != pivot]
        keep_cols = [q for q in range(n) if q != qubit]
        sx = self.x[np.ix_(keep_rows, keep_cols)]
        sz = self.z[np.ix_(keep_rows, keep_cols)]
        sr = self.r[keep_rows]
        dx, dz = _destabilizers_for(sx, sz)
        self.x = np.vstack([dx, sx]).astype(np.uint8)
        self.z = np.vstack([dz, sz]).astype(np.uint8)
        self.r = np.concatenate([np.zeros(n - 1, dtype=np.uint8), sr]).astype(np.uint8)
        self._n = n - 1
        self._maybe_check()
        return value

    # -- inspection ---------------------------------------------------------

    def stabilizers(self) -> Tuple[PauliString, ...]:
        return unstack(self.x[self._n:], self.z[self._n:], self.r[self._n:])

    def destabilizers(self) -> Tuple[PauliString, ...]:
        return unstack(self.x[:self._n], self.z[:self._n], self.r[:self._n])

    def symplectic_form(self) -> np.ndarray:
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        return ((x @ z.T + z @ x.T) & 1).astype(np.uint8)

    def check_invariants(self):
        n = self._n
        expected = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        expected[:n, n:] = np.eye(n, dtype=np.uint8)
        expected[n:, :n] = np.eye(n, dtype=np.uint8)
        if not np.array_equal(self.symplectic_form(), expected):
            raise BackendError('tableau rows lost the destabilizer/stabilizer pairing')
        stab = BitMatrix(np.hstack([self.x[n:], self.z[n:]]), num_cols=2 * n)
        if gf2.rank(stab) != n:
            raise BackendError('stabilizer rows are not independent')

    def _maybe_check(self):
        if config.CHECK_INVARIANTS:
            self.check_invariants()

    def __repr__(self) -> str:
        return f'StabilizerTableau(n={self._n}, stabilizers={[str(s) for s in self.stabilizers()]})'


def _destabilizers_for(sx: np.ndarray, sz: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Mutually commuting partners d_i with <s_j, d_i> = δ_ij."""
    m, n = sx.shape
    system = BitMatrix(np.hstack([sz, sx]), num_cols=2 * n)
    dx = np.zeros((m, n), dtype=np.uint8)
    dz = np.zeros((m, n), dtype=np.uint8)
    for i in range(m):
        d = gf2.solve(system, BitVector.unit(m, i))
        if d is None:
            raise BackendError('stabilizer rows are dependent; cannot rebuild destabilizers')
        bits = d.bits
        dx[i], dz[i] = bits[:n], bits[n:]
    for j in range(m):
        for i in range(j):
            anticommute = (int(dx[i] @ dz[j].astype(np.int64)) + int(dz[i] @ dx[j].astype(np.int64))) & 1
            if anticommute:
                dx[j] ^= sx[i]
                dz[j] ^= sz[i]
    return dx, dz


def new_tableau(n: int) -> StabilizerTableau:
    """All-|0⟩ register."""
    return StabilizerTableau(n)


def apply_gate(t: StabilizerTableau, gate: Gate) -> StabilizerTableau:
    t.apply_gate(gate)
    return t


def _logical_bits(bits, k: int) -> Sequence[int]:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    bits = [int(b) for b in bits]
    if len(bits) != k or any(b not in (0, 1) for b in bits):
        raise DimensionError(f'need a {k}-bit logical basis state, got {bits}')
    return bits


def prepare_code_state(code: ClassicalParityCode, bits, plus: Sequence[int] = (),
                       assignment: Optional[LabelAssignment] = None) -> StabilizerTableau:
    """
    Encoded computational-basis state (logical j set to bits[j]) through the
    canonical encoder. Logical indices listed in ``plus`` start in |+⟩ instead.
    """
    if code.labels is None and assignment is None:
        raise LabelError('preparing an encoded state needs labels')
    assignment = assignment or code.assignment()
    bits = _logical_bits(bits, code.k)
    t = StabilizerTableau(code.n)
    for q, j in assignment.seeds.items():
        if j in plus:
            t.apply_gate(Gate.h(q))
            if bits[j]:
                t.apply_gate(Gate.z(q))
        elif bits[j]:
            t.apply_gate(Gate.x(q))
    for gate in canonical_encoder(code, assignment).gates:
        t.apply_gate(gate)
    return t


def same_stabilizer_group(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    """Both tableaux describe the same state."""
    if a.n != b.n:
        return False
    return all(a.peek_pauli(s) == 1 for s in b.stabilizers())
