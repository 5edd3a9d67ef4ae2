"""
Classical parity codes and the parity-label calculus

A physical qubit's label is the set of logical indices whose Z operators its
own Z operator implements. Labels compose by symmetric difference, and a
labelling is valid when every Z-stabilizer's labels cancel.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from paritycode import gf2
from paritycode.config import config
from paritycode.errors import (CodeFormatError, DimensionError, GuardExceededError, InconsistentLabelsError,
                               LabelError, SeedError, UnderdeterminedLabelsError)
from paritycode.gf2 import BitMatrix, BitVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ParityLabel:
    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        values = tuple(int(i) for i in self.indices)
        if len(set(values)) != len(values):
            raise CodeFormatError(f'duplicate index in label {values}')
        if any(i < 0 for i in values):
            raise CodeFormatError(f'negative index in label {values}')
        object.__setattr__(self, 'indices', tuple(sorted(values)))

    @classmethod
    def of(cls, *indices: int) -> 'ParityLabel':
        return cls(tuple(indices))

    @classmethod
    def from_bits(cls, bits: BitVector) -> 'ParityLabel':
        return cls(bits.support())

    def to_bits(self, k: int) -> BitVector:
        return BitVector.from_indices(k, self.indices)

    def __xor__(self, other: 'ParityLabel') -> 'ParityLabel':
        return ParityLabel(tuple(set(self.indices) ^ set(other.indices)))

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def is_empty(self) -> bool:
        return not self.indices

    @property
    def is_base(self) -> bool:
        return len(self.indices) == 1

    @property
    def is_parity(self) -> bool:
        return len(self.indices) >= 2

    def to_list(self, base: Optional[int] = None) -> List[int]:
        base = config.LABEL_BASE if base is None else base
        return [i + base for i in self.indices]

    def format(self, base: Optional[int] = None) -> str:
        return '{' + ','.join(str(i) for i in self.to_list(base)) + '}'

    @classmethod
    def from_list(cls, values: Iterable[int], base: Optional[int] = None) -> 'ParityLabel':
        base = config.LABEL_BASE if base is None else base
        shifted = []
        for v in values:
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < base:
                raise CodeFormatError(f'label entry {v!r} is not an index >= {base}')
            shifted.append(int(v) - base)
        return cls(tuple(shifted))

    @classmethod
    def parse(cls, text: str, base: Optional[int] = None) -> 'ParityLabel':
        """'{1,3}', '1,3' or '1 3' in the external base."""
        body = text.strip().strip('{}[]()').replace(',', ' ').split()
        try:
            values = [int(v) for v in body]
        except ValueError:
            raise CodeFormatError(f'bad label {text!r}')
        return cls.from_list(values, base)

    def __str__(self) -> str:
        return self.format()


def xor_labels(labels: Iterable[ParityLabel]) -> ParityLabel:
    acc = set()
    for label in labels:
        acc ^= set(label.indices)
    return ParityLabel(tuple(acc))


@dataclass(frozen=True)
class LabelAssignment:
    """Per-qubit labels plus the base qubits they were seeded from."""
    labels: Tuple[ParityLabel, ...]
    seeds: Mapping[int, int]
    k: int

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(self.labels))
        object.__setattr__(self, 'seeds', dict(self.seeds))
        for label in self.labels:
            if any(i >= self.k for i in label):
                raise LabelError(f'label {label} uses an index outside 0..{self.k - 1}')
        for qubit, logical in self.seeds.items():
            if not 0 <= qubit < len(self.labels):
                raise SeedError(f'seed qubit {qubit} outside register')
            if self.labels[qubit] != ParityLabel.of(logical):
                raise SeedError(f'seed qubit {qubit} does not carry the singleton label of {logical}')
        if sorted(self.seeds.values()) != list(range(self.k)):
            raise SeedError('seeds must cover every logical index exactly once')

    @classmethod
    def from_labels(cls, labels: Sequence[ParityLabel], k: int) -> 'LabelAssignment':
        """Seeds are the first qubit carrying each singleton label."""
        seeds: Dict[int, int] = {}
        seen = set()
        for q, label in enumerate(labels):
            if label.is_base and label.indices[0] not in seen:
                seen.add(label.indices[0])
                seeds[q] = label.indices[0]
        if len(seen) != k:
            missing = sorted(set(range(k)) - seen)
            raise SeedError(f'no qubit carries the singleton label of logical(s) {missing}')
        return cls(tuple(labels), seeds, k)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __getitem__(self, q: int) -> ParityLabel:
        return self.labels[q]

    def label_matrix(self) -> BitMatrix:
        """n x k matrix, row q = indicator of label(q)."""
        return BitMatrix([label.to_bits(self.k) for label in self.labels], num_cols=self.k)

    def qubits_with(self, label: ParityLabel) -> Tuple[int, ...]:
        return tuple(q for q, lab in enumerate(self.labels) if lab == label)

    def seed_of(self, logical: int) -> int:
        for q, i in self.seeds.items():
            if i == logical:
                return q
        raise LabelError(f'no seed for logical {logical}')

    def to_lists(self, base: Optional[int] = None) -> List[List[int]]:
        return [label.to_list(base) for label in self.labels]


@dataclass(frozen=True)
class ClassicalParityCode:
    n: int
    k: int
    stabilizers: Tuple[FrozenSet[int], ...] = ()
    labels: Optional[Tuple[ParityLabel, ...]] = None
    coords: Optional[Tuple[Tuple[int, int], ...]] = field(default=None, compare=False)

    def __post_init__(self):
        stabilizers = tuple(frozenset(int(q) for q in s) for s in self.stabilizers)
        object.__setattr__(self, 'stabilizers', stabilizers)
        if self.n < 1:
            raise CodeFormatError('a code needs at least one qubit')
        for s in stabilizers:
            if not s:
                raise CodeFormatError('empty stabilizer support')
            if min(s) < 0 or max(s) >= self.n:
                raise CodeFormatError(f'stabilizer {sorted(s)} outside 0..{self.n - 1}')
        if stabilizers and gf2.rank(self.stabilizer_matrix()) != len(stabilizers):
            raise CodeFormatError('stabilizer generators are linearly dependent')
        if self.k != self.n - len(stabilizers):
            raise CodeFormatError(f'k={self.k} but n - #stabilizers = {self.n - len(stabilizers)}')
        if self.labels is not None:
            labels = tuple(self.labels)
            object.__setattr__(self, 'labels', labels)
            if len(labels) != self.n:
                raise CodeFormatError(f'{len(labels)} labels for {self.n} qubits')
            if any(i >= self.k for label in labels for i in label):
                raise CodeFormatError('label index outside 0..k-1')
            if gf2.rank(self._label_matrix(labels)) != self.k:
                raise CodeFormatError('label matrix does not have rank k')
        if self.coords is not None:
            try:
                coords = tuple((int(a), int(b)) for a, b in self.coords)
            except (TypeError, ValueError):
                raise CodeFormatError('coords must be pairs of integers')
            if len(coords) != self.n:
                raise CodeFormatError(f'{len(coords)} coordinates for {self.n} qubits')
            object.__setattr__(self, 'coords', coords)

    def _label_matrix(self, labels) -> BitMatrix:
        return BitMatrix([label.to_bits(self.k) for label in labels], num_cols=self.k)

    @property
    def num_stabilizers(self) -> int:
        return len(self.stabilizers)

    def stabilizer_matrix(self) -> BitMatrix:
        """#stabilizers x n indicator matrix."""
        return BitMatrix([BitVector.from_indices(self.n, s) for s in self.stabilizers], num_cols=self.n)

    def stabilizer_weights(self) -> Tuple[int, ...]:
        return tuple(len(s) for s in self.stabilizers)

    def assignment(self) -> LabelAssignment:
        if self.labels is None:
            raise LabelError('code carries no labels')
        return LabelAssignment.from_labels(self.labels, self.k)

    def with_labels(self, labels: Optional[Sequence[ParityLabel]]) -> 'ClassicalParityCode':
        return ClassicalParityCode(self.n, self.k, self.stabilizers,
                                   None if labels is None else tuple(labels), self.coords)

    def without_labels(self) -> 'ClassicalParityCode':
        return self.with_labels(None)

    # -- JSON ---------------------------------------------------------------

    def to_dict(self, base: Optional[int] = None) -> Dict[str, Any]:
        return {
            'n': self.n,
            'k': self.k,
            'stabilizers': [sorted(s) for s in self.stabilizers],
            'labels': None if self.labels is None else [label.to_list(base) for label in self.labels],
            'coords': None if self.coords is None else [list(c) for c in self.coords],
        }

    def to_json(self, base: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(base))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: Optional[int] = None) -> 'ClassicalParityCode':
        if not isinstance(data, Mapping):
            raise CodeFormatError('code must be a JSON object')
        try:
            n, k = data['n'], data['k']
            stabilizers = data.get('stabilizers') or []
        except KeyError as e:
            raise CodeFormatError(f'missing field {e.args[0]!r}')
        if not isinstance(n, int) or not isinstance(k, int):
            raise CodeFormatError('n and k must be integers')
        try:
            stab_sets = []
            for s in stabilizers:
                if len(set(s)) != len(s):
                    raise CodeFormatError(f'repeated qubit in stabilizer {s}')
                stab_sets.append(frozenset(int(q) for q in s))
        except CodeFormatError:
            raise
        except (TypeError, ValueError):
            raise CodeFormatError('stabilizers must be lists of qubit indices')
        labels = data.get('labels')
        coords = data.get('coords')
        try:
            parsed_labels = None if labels is None else tuple(ParityLabel.from_list(lab, base) for lab in labels)
            parsed_coords = None if coords is None else tuple((c[0], c[1]) for c in coords)
        except CodeFormatError:
            raise
        except (TypeError, IndexError, ValueError):
            raise CodeFormatError('labels must be lists of indices and coords pairs of integers')
        return cls(n, k, tuple(stab_sets), parsed_labels, parsed_coords)

    @classmethod
    def from_json(cls, text: str, base: Optional[int] = None) -> 'ClassicalParityCode':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise CodeFormatError(f'invalid JSON: {e}')
        return cls.from_dict(data, base)


class LabelValidation(NamedTuple):
    passed: bool
    offending: Tuple[int, ...]
    offending_supports: Tuple[Tuple[int, ...], ...]
    rank: int

    def __bool__(self) -> bool:
        return self.passed


class CodeDistance(NamedTuple):
    per_logical: Tuple[int, ...]
    distance: int


def validate_labels(code: ClassicalParityCode, assignment: LabelAssignment) -> LabelValidation:
    """Every stabilizer's labels cancel and the label matrix has rank k."""
    if assignment.n != code.n:
        raise DimensionError(f'assignment covers {assignment.n} qubits, code has {code.n}')
    offending = tuple(idx for idx, s in enumerate(code.stabilizers)
                      if not xor_labels(assignment.labels[q] for q in s).is_empty)
    label_rank = gf2.rank(assignment.label_matrix())
    passed = not offending and label_rank == code.k and assignment.k == code.k
    return LabelValidation(passed, offending,
                           tuple(tuple(sorted(code.stabilizers[i])) for i in offending), label_rank)


def _auto_seeds(code: ClassicalParityCode) -> Dict[int, int]:
    basis = gf2.nullspace(code.stabilizer_matrix())
    _, pivots = gf2.rref(basis)
    return {q: j for j, q in enumerate(pivots)}


def _check_seeds(code: ClassicalParityCode, seeds: Mapping[int, int]):
    if len(seeds) > code.k:
        raise SeedError(f'{len(seeds)} seeds for k={code.k}')
    if len(set(seeds.values())) != len(seeds):
        raise SeedError('two seeds share a logical index')
    for q, j in seeds.items():
        if not 0 <= q < code.n:
            raise SeedError(f'seed qubit {q} outside 0..{code.n - 1}')
        if not 0 <= j < code.k:
            raise SeedError(f'seed logical index {j} outside 0..{code.k - 1}')


def derive_labels(code: ClassicalParityCode, seeds: Optional[Mapping[int, int]] = None) -> LabelAssignment:
    """
    Propagate labels from the seed qubits through the stabilizers.

    Any stabilizer with exactly one unlabelled qubit fixes that qubit's label;
    whatever propagation cannot reach is solved for as a GF(2) linear system.
    Without seeds, base qubits are the rref pivots of the stabilizer null space.
    """
    if seeds is None:
        seeds = _auto_seeds(code)
        logger.debug(f'auto-selected base qubits {sorted(seeds)}')
    seeds = {int(q): int(j) for q, j in seeds.items()}
    _check_seeds(code, seeds)

    k = code.k
    known: Dict[int, BitVector] = {q: BitVector.unit(k, j) for q, j in seeds.items()}
    changed = True
    while changed:
        changed = False
        for s in code.stabilizers:
            unknown = [q for q in s if q not in known]
            if len(unknown) != 1:
                continue
            acc = BitVector.zeros(k)
            for q in s:
                if q in known:
                    acc = acc ^ known[q]
            known[unknown[0]] = acc
            changed = True

    closed = tuple(idx for idx, s in enumerate(code.stabilizers)
                   if all(q in known for q in s) and not _xor_bits(known[q] for q in s).is_zero())
    if closed:
        raise InconsistentLabelsError(f'seeds contradict stabilizer(s) {list(closed)}', closed)

    unresolved = [q for q in range(code.n) if q not in known]
    if unresolved:
        logger.debug(f'propagation left {len(unresolved)} qubit(s); solving the linear system')
        known.update(_solve_remaining(code, known, unresolved))

    labels = tuple(ParityLabel.from_bits(known[q]) for q in range(code.n))
    bad = tuple(idx for idx, s in enumerate(code.stabilizers) if not xor_labels(labels[q] for q in s).is_empty)
    if bad:
        raise InconsistentLabelsError(f'seeds contradict stabilizer(s) {list(bad)}', bad)
    if len(seeds) < k:
        raise UnderdeterminedLabelsError(f'{k - len(seeds)} logical index(es) have no seed', ())

    empty = [q for q, label in enumerate(labels) if label.is_empty]
    if empty:
        logger.warning(f'qubits {empty} have empty labels (their Z lies in the stabilizer group)')
    assignment = LabelAssignment(labels, seeds, k)
    result = validate_labels(code, assignment)
    if not result:
        raise InconsistentLabelsError(f'derived labels fail validation (rank {result.rank})', result.offending)
    return assignment


def _xor_bits(vectors: Iterable[BitVector]) -> BitVector:
    vectors = list(vectors)
    acc = vectors[0]
    for v in vectors[1:]:
        acc = acc ^ v
    return acc


def _solve_remaining(code: ClassicalParityCode, known: Mapping[int, BitVector],
                     unresolved: Sequence[int]) -> Dict[int, BitVector]:
    k = code.k
    a = code.stabilizer_matrix().to_array()
    a_unknown = BitMatrix(a[:, list(unresolved)], num_cols=len(unresolved))
    touching = tuple(i for i, s in enumerate(code.stabilizers) if s & set(unresolved))

    columns = []
    for j in range(k):
        rhs = np.zeros(code.num_stabilizers, dtype=np.uint8)
        for q, bits in known.items():
            if bits[j]:
                rhs ^= a[:, q]
        x = gf2.solve(a_unknown, BitVector(rhs))
        if x is None:
            raise InconsistentLabelsError(f'seeds admit no consistent label for logical {j}', touching)
        columns.append(x.bits)

    free = gf2.nullspace(a_unknown).to_array()
    if free.size:
        undetermined = sorted(unresolved[c] for c in np.flatnonzero(free.any(axis=0)))
        raise UnderdeterminedLabelsError(f'labels of qubits {undetermined} are not fixed by the seeds', undetermined)

    solved = np.array(columns, dtype=np.uint8).T if columns else np.zeros((len(unresolved), 0), dtype=np.uint8)
    return {q: BitVector(solved[idx]) for idx, q in enumerate(unresolved)}


def logical_x_support(assignment: LabelAssignment, i: int) -> Tuple[int, ...]:
    """Qubits whose label contains i; X on all of them is a logical X representative."""
    if not 0 <= i < assignment.k:
        raise DimensionError(f'logical index {i} outside 0..{assignment.k - 1}')
    return tuple(q for q, label in enumerate(assignment.labels) if i in label)


def label_of_z(assignment: LabelAssignment, qubits: Iterable[int]) -> ParityLabel:
    qubits = list(qubits)
    for q in qubits:
        if not 0 <= q < assignment.n:
            raise DimensionError(f'qubit {q} outside 0..{assignment.n - 1}')
    return xor_labels(assignment.labels[q] for q in qubits)


# ---------------------------------------------------------------------------
# Code families

def lhz_layout(k: int) -> ClassicalParityCode:
    """
    The [k(k+1)/2, k, k] LHZ code.

    Qubit (i, j), i <= j, carries label {i, j} ({i} on the diagonal). Qubits are
    ordered by row j - i and then by i, so the k base qubits come first. The
    stabilizer basis is the triangular-plaquette one: a triangle closing each
    neighbouring pair of base qubits, a triangle on each row-2 qubit and its two
    row-1 neighbours, and a diamond for every higher row.
    """
    if k < 2:
        raise DimensionError('the LHZ layout needs k >= 2')
    pairs = [(i, i + d) for d in range(k) for i in range(k - d)]
    index = {p: q for q, p in enumerate(pairs)}

    stabilizers: List[FrozenSet[int]] = []
    for i in range(k - 1):
        stabilizers.append(frozenset({index[(i, i)], index[(i + 1, i + 1)], index[(i, i + 1)]}))
    for i in range(k - 2):
        stabilizers.append(frozenset({index[(i, i + 1)], index[(i + 1, i + 2)], index[(i, i + 2)]}))
    for d in range(2, k - 1):
        for i in range(k - d - 1):
            stabilizers.append(frozenset({index[(i, i + d)], index[(i + 1, i + d + 1)],
                                          index[(i, i + d + 1)], index[(i + 1, i + d)]}))

    labels = tuple(ParityLabel(tuple({i, j})) for i, j in pairs)
    coords = tuple((i + j, j - i) for i, j in pairs)
    return ClassicalParityCode(len(pairs), k, tuple(stabilizers), labels, coords)


def repetition_code(n: int) -> ClassicalParityCode:
    """n copies of one logical bit, chained by weight-2 stabilizers."""
    if n < 1:
        raise DimensionError('repetition code needs n >= 1')
    stabilizers = tuple(frozenset({q, q + 1}) for q in range(n - 1))
    return ClassicalParityCode(n, 1, stabilizers, tuple(ParityLabel.of(0) for _ in range(n)),
                               tuple((0, q) for q in range(n)))


def trivial_code(k: int) -> ClassicalParityCode:
    """k unprotected base qubits."""
    return ClassicalParityCode(k, k, (), tuple(ParityLabel.of(i) for i in range(k)))


# ---------------------------------------------------------------------------
# Distance

def _parity_bits(values: np.ndarray) -> np.ndarray:
    values = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        values ^= values >> np.uint64(shift)
    return values & np.uint64(1)


def code_distance(code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None,
                  chunk: int = 1 << 14) -> CodeDistance:
    """
    Exhaustive X-distance.

    For every nonempty subset S of logical indices, the cheapest logical X
    flipping exactly S has weight |{q : |label(q) ∩ S| odd}|.
    """
    if assignment is None:
        assignment = code.assignment()
    k = code.k
    if k > config.DISTANCE_MAX_K:
        raise GuardExceededError(f'k={k} exceeds the exhaustive distance guard {config.DISTANCE_MAX_K}')
    if k == 0:
        return CodeDistance((), 0)
    masks = np.array([sum(1 << i for i in label) for label in assignment.labels], dtype=np.uint64)
    per_logical = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
    logical_bits = np.arange(k, dtype=np.uint64)

    total = 1 << k
    for start in range(1, total, chunk):
        subsets = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        weights = _parity_bits(subsets[:, np.newaxis] & masks[np.newaxis, :]).sum(axis=1).astype(np.int64)
        member = ((subsets[:, np.newaxis] >> logical_bits[np.newaxis, :]) & np.uint64(1)).astype(bool)
        masked = np.where(member, weights[:, np.newaxis], np.iinfo(np.int64).max)
        per_logical = np.minimum(per_logical, masked.min(axis=0))

    per = tuple(int(d) for d in per_logical)
    return CodeDistance(per, min(per))
