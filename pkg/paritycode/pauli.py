"""
Pauli strings and the Clifford conjugation rules shared by every backend

A PauliString is ``sign * P_0 ⊗ ... ⊗ P_{n-1}`` with each factor encoded by an
(x, z) bit pair: (0,0)=I, (1,0)=X, (0,1)=Z, (1,1)=Y. The update rules below act
in place on stacks of such rows and implement forward conjugation P -> G P G†.
"""
import re
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from paritycode.errors import CodeFormatError, DimensionError, UnsupportedGateError
from paritycode.gf2 import BitVector

_LETTERS = {(0, 0): 'I', (1, 0): 'X', (0, 1): 'Z', (1, 1): 'Y'}
_BITS = {v: k for k, v in _LETTERS.items()}
_FACTOR = re.compile(r'^([XYZ])(\d+)$')


# ---------------------------------------------------------------------------
# Clifford update rules on row stacks (x, z: (rows, n) uint8; r: (rows,) uint8)

def _rule_h(x, z, r, q):
    r ^= x[:, q] & z[:, q]
    x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()


def _rule_s(x, z, r, q):
    r ^= x[:, q] & z[:, q]
    z[:, q] ^= x[:, q]


def _rule_x(x, z, r, q):
    r ^= z[:, q]


def _rule_z(x, z, r, q):
    r ^= x[:, q]


def _rule_cnot(x, z, r, c, t):
    r ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
    x[:, t] ^= x[:, c]
    z[:, c] ^= z[:, t]


CLIFFORD_RULES: Dict[str, Callable] = {
    'H': _rule_h,
    'S': _rule_s,
    'X': _rule_x,
    'Z': _rule_z,
    'CNOT': _rule_cnot,
}

# Every supported gate is self-inverse except S, whose inverse is S^3
_INVERSE_REPEATS = {'S': 3}


def conjugate_rows(x: np.ndarray, z: np.ndarray, r: np.ndarray,
                   name: str, qubits: Sequence[int], inverse: bool = False):
    """Conjugate every row in place: G P G† (or G† P G when inverse=True)."""
    rule = CLIFFORD_RULES.get(name)
    if rule is None:
        raise UnsupportedGateError(f'{name} is not a supported Clifford gate')
    repeats = _INVERSE_REPEATS.get(name, 1) if inverse else 1
    for _ in range(repeats):
        rule(x, z, r, *qubits)


def phase_exponents(x1, z1, x2, z2) -> np.ndarray:
    """Power of i picked up per row when multiplying P1 (left) by rows P2."""
    x1 = np.asarray(x1, dtype=np.int64)
    z1 = np.asarray(z1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    z2 = np.asarray(z2, dtype=np.int64)
    g = np.where((x1 == 1) & (z1 == 1), z2 - x2,
                 np.where(x1 == 1, z2 * (2 * x2 - 1),
                          np.where(z1 == 1, x2 * (1 - 2 * z2), 0)))
    return g.sum(axis=-1)


def rowsum(x: np.ndarray, z: np.ndarray, r: np.ndarray, targets, source: int):
    """Replace each target row h by row[source] * row[h] (phases kept mod 4 / 2)."""
    targets = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    if targets.size == 0:
        return
    total = (2 * r[targets].astype(np.int64) + 2 * int(r[source])
             + phase_exponents(x[source], z[source], x[targets], z[targets]))
    r[targets] = ((total % 4) // 2).astype(np.uint8)
    x[targets] ^= x[source]
    z[targets] ^= z[source]


def symplectic_products(x: np.ndarray, z: np.ndarray, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
    """1 for every row anticommuting with the Pauli (px, pz), else 0."""
    return ((x.astype(np.int64) @ pz.astype(np.int64) + z.astype(np.int64) @ px.astype(np.int64)) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------

class PauliString:
    """Hermitian n-qubit Pauli operator with sign ±1."""

    __slots__ = ('_x', '_z', '_sign')

    def __init__(self, x: Iterable[int], z: Iterable[int], sign: int = 1):
        x = np.array(list(x) if not isinstance(x, np.ndarray) else x, dtype=np.uint8) & 1
        z = np.array(list(z) if not isinstance(z, np.ndarray) else z, dtype=np.uint8) & 1
        if x.shape != z.shape or x.ndim != 1:
            raise DimensionError('x and z bit rows must be one-dimensional and of equal length')
        if sign not in (1, -1):
            raise ValueError('sign must be +1 or -1')
        x.setflags(write=False)
        z.setflags(write=False)
        self._x, self._z, self._sign = x, z, sign

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> 'PauliString':
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def z_on(cls, n: int, qubits: Iterable[int], sign: int = 1) -> 'PauliString':
        z = np.zeros(n, dtype=np.uint8)
        for q in qubits:
            z[q] ^= 1
        return cls(np.zeros(n, dtype=np.uint8), z, sign)

    @classmethod
    def x_on(cls, n: int, qubits: Iterable[int], sign: int = 1) -> 'PauliString':
        x = np.zeros(n, dtype=np.uint8)
        for q in qubits:
            x[q] ^= 1
        return cls(x, np.zeros(n, dtype=np.uint8), sign)

    @classmethod
    def from_str(cls, text: str) -> 'PauliString':
        """Dense form, e.g. '+XZI', '-YY', 'ZIZ'."""
        text = text.strip()
        sign = 1
        if text[:1] in '+-':
            sign = -1 if text[0] == '-' else 1
            text = text[1:]
        try:
            pairs = [_BITS[c] for c in text.upper().replace('_', 'I')]
        except KeyError:
            raise CodeFormatError(f'not a Pauli string: {text!r}')
        x = [p[0] for p in pairs]
        z = [p[1] for p in pairs]
        return cls(x, z, sign)

    @classmethod
    def from_product(cls, text: str, n: int) -> 'PauliString':
        """Sparse product form used by MPP lines, e.g. 'Z0*Z1*Z2' or '-X3*Y4'."""
        text = text.strip()
        sign = 1
        if text[:1] in '+-!':
            sign = -1 if text[0] in '-!' else 1
            text = text[1:]
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for factor in text.split('*'):
            match = _FACTOR.match(factor.strip().upper())
            if not match:
                raise CodeFormatError(f'bad Pauli factor {factor!r}')
            letter, q = match.group(1), int(match.group(2))
            if q >= n:
                raise CodeFormatError(f'qubit {q} outside register of {n}')
            if x[q] or z[q]:
                raise CodeFormatError(f'qubit {q} appears twice in {text!r}')
            x[q], z[q] = _BITS[letter]
        return cls(x, z, sign)

    # -- accessors ----------------------------------------------------------

    @property
    def n(self) -> int:
        return int(self._x.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def z(self) -> np.ndarray:
        return self._z

    @property
    def sign(self) -> int:
        return self._sign

    @property
    def x_bits(self) -> BitVector:
        return BitVector(self._x)

    @property
    def z_bits(self) -> BitVector:
        return BitVector(self._z)

    def support(self) -> Tuple[int, ...]:
        return tuple(int(q) for q in np.flatnonzero(self._x | self._z))

    def weight(self) -> int:
        return int(np.count_nonzero(self._x | self._z))

    def is_identity(self) -> bool:
        return not (self._x.any() or self._z.any())

    def is_z_type(self) -> bool:
        return not self._x.any()

    def commutes(self, other: 'PauliString') -> bool:
        self._check(other)
        return int((self._x @ other._z.astype(np.int64) + self._z @ other._x.astype(np.int64)) & 1) == 0

    def _check(self, other: 'PauliString'):
        if self.n != other.n:
            raise DimensionError(f'Pauli strings on {self.n} and {other.n} qubits')

    # -- algebra ------------------------------------------------------------

    def __mul__(self, other: 'PauliString') -> 'PauliString':
        """Product of commuting strings (the result is Hermitian)."""
        self._check(other)
        if not self.commutes(other):
            raise ValueError('product of anticommuting Pauli strings is not Hermitian')
        exponent = (int(phase_exponents(self._x, self._z, other._x, other._z))
                    + (0 if self._sign == 1 else 2) + (0 if other._sign == 1 else 2)) % 4
        return PauliString(self._x ^ other._x, self._z ^ other._z, 1 if exponent == 0 else -1)

    def times_up_to_phase(self, other: 'PauliString') -> 'PauliString':
        self._check(other)
        return PauliString(self._x ^ other._x, self._z ^ other._z, self._sign * other._sign)

    def __neg__(self) -> 'PauliString':
        return PauliString(self._x, self._z, -self._sign)

    def unsigned(self) -> 'PauliString':
        return PauliString(self._x, self._z, 1)

    def conjugated(self, name: str, qubits: Sequence[int], inverse: bool = False) -> 'PauliString':
        x = self._x.copy()[np.newaxis, :]
        z = self._z.copy()[np.newaxis, :]
        r = np.array([0 if self._sign == 1 else 1], dtype=np.uint8)
        conjugate_rows(x, z, r, name, qubits, inverse=inverse)
        return PauliString(x[0], z[0], -1 if r[0] else 1)

    # -- formatting ---------------------------------------------------------

    def __str__(self) -> str:
        return ('+' if self._sign == 1 else '-') + ''.join(
            _LETTERS[(int(a), int(b))] for a, b in zip(self._x, self._z))

    def to_product(self) -> str:
        factors = [f'{_LETTERS[(int(self._x[q]), int(self._z[q]))]}{q}' for q in self.support()]
        body = '*'.join(factors) if factors else 'I0'
        return ('-' if self._sign == -1 else '') + body

    def __repr__(self) -> str:
        return f"PauliString('{self}')"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self._sign == other._sign and np.array_equal(self._x, other._x)
                and np.array_equal(self._z, other._z))

    def __hash__(self) -> int:
        return hash((self._sign, self._x.tobytes(), self._z.tobytes()))

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (qubit 0 is the most significant bit)."""
        single = {
            'I': np.eye(2, dtype=complex),
            'X': np.array([[0, 1], [1, 0]], dtype=complex),
            'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
            'Z': np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for a, b in zip(self._x, self._z):
            out = np.kron(out, single[_LETTERS[(int(a), int(b))]])
        return self._sign * out


def stack(paulis: Sequence[PauliString]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row arrays (x, z, r) for a list of Pauli strings."""
    if not paulis:
        raise ValueError('cannot stack an empty list of Pauli strings')
    x = np.vstack([p.x for p in paulis]).astype(np.uint8)
    z = np.vstack([p.z for p in paulis]).astype(np.uint8)
    r = np.array([0 if p.sign == 1 else 1 for p in paulis], dtype=np.uint8)
    return x, z, r


def unstack(x: np.ndarray, z: np.ndarray, r: np.ndarray) -> Tuple[PauliString, ...]:
    return tuple(PauliString(x[i], z[i], -1 if r[i] else 1) for i in range(x.shape[0]))
