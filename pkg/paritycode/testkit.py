"""
Generators and oracles shared by the test suite and the fault experiments
"""
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ClassicalParityCode, LabelAssignment, ParityLabel, validate_labels
from paritycode.config import config
from paritycode.errors import GeneratorError, GuardExceededError
from paritycode.pauli import PauliString
from paritycode.register import measurement_pauli
from paritycode.statevector import StateVector
from paritycode.tableau import StabilizerTableau

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Random codes

@dataclass(frozen=True)
class CodeGeneratorSpec:
    n_range: Tuple[int, int]
    k_range: Tuple[int, int]
    max_weight: Optional[int] = None
    seed: Optional[int] = None

    def feasible_pairs(self) -> List[Tuple[int, int]]:
        """(n, k) pairs a code with stabilizer weight <= max_weight can realise."""
        pairs = []
        for n in range(self.n_range[0], self.n_range[1] + 1):
            for k in range(max(1, self.k_range[0]), self.k_range[1] + 1):
                if k > n:
                    continue
                if n > k and self.max_weight is not None and self.max_weight < 2:
                    continue
                pairs.append((n, k))
        return pairs


def random_code(spec: CodeGeneratorSpec, rng: Optional[np.random.Generator] = None,
                max_attempts: int = 16) -> Tuple[ClassicalParityCode, LabelAssignment]:
    """
    Random labelled code: k base qubits at random positions, every other qubit
    a random nonempty parity of them. Without a weight bound the star-shaped
    stabilizers are mixed by random row additions.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    pairs = spec.feasible_pairs()
    if not pairs:
        raise GeneratorError(f'no feasible (n, k) in n∈{spec.n_range}, k∈{spec.k_range}, '
                             f'max weight {spec.max_weight}')
    for _ in range(max_attempts):
        n, k = pairs[int(rng.integers(len(pairs)))]
        positions = rng.permutation(n)
        seeds = {int(q): j for j, q in enumerate(positions[:k])}
        seed_of = {j: q for q, j in seeds.items()}
        largest = k if spec.max_weight is None else min(k, spec.max_weight - 1)

        labels: List[ParityLabel] = [ParityLabel()] * n
        for q, j in seeds.items():
            labels[q] = ParityLabel.of(j)
        rows = []
        for q in (int(p) for p in positions[k:]):
            size = int(rng.integers(1, largest + 1))
            label = ParityLabel(tuple(int(j) for j in rng.choice(k, size=size, replace=False)))
            labels[q] = label
            row = np.zeros(n, dtype=np.uint8)
            row[q] = 1
            for j in label:
                row[seed_of[j]] = 1
            rows.append(row)

        if spec.max_weight is None:
            for _ in range(len(rows)):
                if len(rows) < 2:
                    break
                a, b = rng.choice(len(rows), size=2, replace=False)
                rows[a] = rows[a] ^ rows[b]
        stabilizers = tuple(frozenset(int(q) for q in np.flatnonzero(row)) for row in rows)
        code = ClassicalParityCode(n, k, stabilizers, tuple(labels))
        assignment = LabelAssignment(tuple(labels), seeds, k)
        if validate_labels(code, assignment):
            return code, assignment
        logger.debug('generated code failed validation; retrying')
    raise GeneratorError(f'no valid code after {max_attempts} attempts')


# ---------------------------------------------------------------------------
# Random circuits

_ONE_QUBIT = ('H', 'S', 'X', 'Z')


def random_clifford_circuit(n: int, depth: int, rng: np.random.Generator, measure_every: int = 0) -> Circuit:
    """``depth`` random Clifford gates; with measure_every > 0 an MX/MZ/MPP is inserted that often."""
    gates = []
    for position in range(depth):
        if n > 1 and rng.random() < 0.4:
            c, t = (int(q) for q in rng.choice(n, size=2, replace=False))
            gates.append(Gate.cnot(c, t))
        else:
            gates.append(Gate(_ONE_QUBIT[int(rng.integers(4))], (int(rng.integers(n)),)))
        if measure_every and (position + 1) % measure_every == 0:
            gates.append(_random_measurement(n, rng))
    return Circuit(n, tuple(gates))


def _random_measurement(n: int, rng: np.random.Generator) -> Gate:
    choice = int(rng.integers(3))
    q = int(rng.integers(n))
    if choice == 0:
        return Gate.mz(q)
    if choice == 1:
        return Gate.mx(q)
    return Gate.mpp(random_pauli(n, rng))


def random_pauli(n: int, rng: np.random.Generator) -> PauliString:
    while True:
        x = rng.integers(2, size=n)
        z = rng.integers(2, size=n)
        if x.any() or z.any():
            return PauliString(x, z)


# ---------------------------------------------------------------------------
# Cross-backend harness

class BackendCheck(NamedTuple):
    passed: bool
    mismatches: Tuple[str, ...]
    trials: int

    def __bool__(self) -> bool:
        return self.passed


def _compare(t: StabilizerTableau, sv: StateVector, pauli: PauliString, where: str, tol: float) -> Optional[str]:
    value = t.peek_pauli(pauli)
    p_plus = sv.probability(pauli, 1)
    expected = 0.5 if value is None else (1.0 if value == 1 else 0.0)
    if abs(p_plus - expected) > tol:
        verdict = 'random' if value is None else f'{value:+d}'
        return f'{where}: {pauli.to_product()} tableau {verdict}, state vector P(+1)={p_plus:.6f}'
    return None


def cross_backend_check(circuit: Circuit, n: Optional[int] = None, trials: int = 20, seed: int = 0,
                        final_checks: int = 4, tol: float = 1e-9) -> BackendCheck:
    """
    Run the circuit on both simulators along ``trials`` random measurement
    branches. At every measurement (and on random Paulis at the end) the
    tableau's deterministic/random verdict must equal the state vector's
    outcome probability; both follow the same forced outcome.
    """
    n = circuit.num_qubits if n is None else n
    rng = np.random.default_rng(seed)
    mismatches: List[str] = []
    for trial in range(trials):
        t = StabilizerTableau(n)
        sv = StateVector(n)
        for position, gate in enumerate(circuit.gates):
            if not gate.is_measurement:
                t.apply_gate(gate)
                sv.apply_gate(gate)
                continue
            pauli = measurement_pauli(gate, n)
            problem = _compare(t, sv, pauli, f'trial {trial} gate {position}', tol)
            if problem:
                mismatches.append(problem)
                break
            forced = t.peek_pauli(pauli) or (1 if rng.integers(2) == 0 else -1)
            t.measure_pauli(pauli, forced=forced)
            sv.measure_pauli(pauli, forced=forced)
        else:
            for check in range(final_checks):
                problem = _compare(t, sv, random_pauli(n, rng), f'trial {trial} final {check}', tol)
                if problem:
                    mismatches.append(problem)
                    break
            for s in t.stabilizers():
                if abs(sv.expectation(s) - 1) > tol:
                    mismatches.append(f'trial {trial}: state vector is not stabilized by {s}')
                    break
    if mismatches:
        logger.info(f'cross-backend check found {len(mismatches)} mismatch(es)')
    return BackendCheck(not mismatches, tuple(mismatches), trials)


# ---------------------------------------------------------------------------
# Minimum-weight lookup decoder

class DecoderTable(NamedTuple):
    """Arrays indexed by syndrome value (bit j = stabilizer j)."""
    n: int
    correction: np.ndarray  # int64 qubit masks, bit q = qubit q
    weight: np.ndarray
    ambiguous: np.ndarray  # min-weight corrections disagree on the logical class

    @property
    def num_syndromes(self) -> int:
        return int(self.correction.shape[0])

    def correction_qubits(self, syndrome: int) -> Tuple[int, ...]:
        mask = int(self.correction[syndrome])
        return tuple(q for q in range(self.n) if mask >> q & 1)

    def lookup(self, syndrome: int) -> Tuple[Tuple[int, ...], bool]:
        return self.correction_qubits(syndrome), bool(self.ambiguous[syndrome])


def _popcount(values: np.ndarray) -> np.ndarray:
    values = values.astype(np.uint64)
    count = np.zeros(values.shape, dtype=np.int64)
    while values.any():
        count += (values & np.uint64(1)).astype(np.int64)
        values = values >> np.uint64(1)
    return count


def _masks(supports, shift: int = 0) -> np.ndarray:
    return np.array([sum(1 << (q + shift) for q in s) for s in supports], dtype=np.uint64)


def syndrome_values(errors: np.ndarray, code: ClassicalParityCode) -> np.ndarray:
    """Syndrome integers of X-error masks."""
    errors = errors.astype(np.uint64)
    syndrome = np.zeros(errors.shape, dtype=np.int64)
    for j, mask in enumerate(_masks(code.stabilizers)):
        syndrome |= (_popcount(errors & mask) & 1) << j
    return syndrome


def logical_classes(errors: np.ndarray, assignment: LabelAssignment) -> np.ndarray:
    """Bit i set when the error anticommutes with the Z of logical i's seed."""
    errors = errors.astype(np.uint64)
    classes = np.zeros(errors.shape, dtype=np.int64)
    for q, i in assignment.seeds.items():
        classes |= ((errors >> np.uint64(q)) & np.uint64(1)).astype(np.int64) << i
    return classes


def build_decoder_table(code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None) -> DecoderTable:
    """
    Exhaustive minimum-weight X decoder. Among equal-weight corrections the
    lexicographically first qubit tuple wins; syndromes whose minimum-weight
    corrections fall into different logical classes are marked ambiguous.
    """
    if code.n > config.DECODER_MAX_QUBITS:
        raise GuardExceededError(f'n={code.n} exceeds the decoder guard {config.DECODER_MAX_QUBITS}')
    assignment = assignment or code.assignment()
    n = code.n
    errors = np.arange(1 << n, dtype=np.uint64)
    weights = _popcount(errors)
    syndromes = syndrome_values(errors, code)
    classes = logical_classes(errors, assignment)

    size = 1 << code.num_stabilizers
    best_weight = np.full(size, n + 1, dtype=np.int64)
    np.minimum.at(best_weight, syndromes, weights)
    at_min = weights == best_weight[syndromes]

    # lexicographic order on sorted qubit tuples = descending order of the bit-reversed mask
    reversed_masks = np.zeros(errors.shape, dtype=np.int64)
    for q in range(n):
        reversed_masks |= ((errors >> np.uint64(q)) & np.uint64(1)).astype(np.int64) << (n - 1 - q)
    best_key = np.full(size, -1, dtype=np.int64)
    np.maximum.at(best_key, syndromes[at_min], reversed_masks[at_min])
    correction = np.zeros(size, dtype=np.int64)
    for q in range(n):
        correction |= ((best_key >> (n - 1 - q)) & 1) << q

    low = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
    high = np.full(size, -1, dtype=np.int64)
    np.minimum.at(low, syndromes[at_min], classes[at_min])
    np.maximum.at(high, syndromes[at_min], classes[at_min])
    ambiguous = low != high
    logger.debug(f'decoder table for n={n}: {size} syndromes, {int(ambiguous.sum())} ambiguous')
    return DecoderTable(n, correction, best_weight, ambiguous)
