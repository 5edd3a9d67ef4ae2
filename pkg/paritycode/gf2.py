"""
Bit-exact linear algebra over GF(2)

Vectors and matrices keep their bits packed into 64-bit little-endian words.
All public contracts talk about logical bit positions only, so the packing is
never observable from outside this module.
"""
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from paritycode.errors import DimensionError

WORD = 64
_WORD_DTYPE = np.dtype('<u8')

BitsLike = Union['BitVector', Sequence[int], np.ndarray]


def _num_words(length: int) -> int:
    return max(1, (length + WORD - 1) // WORD)


def _as_bits(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError('GF(2) entries must be 0 or 1')
    return arr.astype(np.uint8)


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., length) 0/1 array into (..., words) uint64 words."""
    length = bits.shape[-1]
    pad = [(0, 0)] * (bits.ndim - 1) + [(0, _num_words(length) * WORD - length)]
    packed = np.packbits(np.pad(bits, pad), axis=-1, bitorder='little')
    return np.ascontiguousarray(packed).view(_WORD_DTYPE)


def _unpack(words: np.ndarray, length: int) -> np.ndarray:
    raw = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder='little')[..., :length]


def _popcount_parity(words: np.ndarray) -> np.ndarray:
    """Parity of the set bits along the last axis."""
    raw = np.ascontiguousarray(words).view(np.uint8)
    return (np.unpackbits(raw, axis=-1).sum(axis=-1) & 1).astype(np.uint8)


class BitVector:
    """Fixed-length, immutable vector over GF(2)."""

    __slots__ = ('_words', '_length')

    def __init__(self, bits: Iterable[int] = ()):
        if isinstance(bits, BitVector):
            words, length = bits._words, bits._length
        else:
            arr = _as_bits(list(bits) if not isinstance(bits, np.ndarray) else bits)
            if arr.ndim != 1:
                raise DimensionError('BitVector needs a one-dimensional bit sequence')
            words, length = _pack(arr), int(arr.shape[0])
        self._set(words, length)

    def _set(self, words: np.ndarray, length: int):
        words = np.array(words, dtype=_WORD_DTYPE, copy=True)
        words.setflags(write=False)
        self._words = words
        self._length = length

    @classmethod
    def _from_words(cls, words: np.ndarray, length: int) -> 'BitVector':
        vec = cls.__new__(cls)
        vec._set(words, length)
        return vec

    @classmethod
    def zeros(cls, length: int) -> 'BitVector':
        return cls._from_words(np.zeros(_num_words(length), dtype=_WORD_DTYPE), length)

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> 'BitVector':
        bits = np.zeros(length, dtype=np.uint8)
        for i in indices:
            if not 0 <= i < length:
                raise DimensionError(f'index {i} outside vector of length {length}')
            bits[i] ^= 1
        return cls(bits)

    @classmethod
    def unit(cls, length: int, i: int) -> 'BitVector':
        return cls.from_indices(length, [i])

    def __len__(self) -> int:
        return self._length

    @property
    def length(self) -> int:
        return self._length

    @property
    def bits(self) -> np.ndarray:
        return _unpack(self._words, self._length).copy()

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError(i)
        word, bit = divmod(i, WORD)
        return int((int(self._words[word]) >> bit) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(int(b) for b in self.bits)

    def _check_same_length(self, other: 'BitVector'):
        if self._length != other._length:
            raise DimensionError(f'length mismatch: {self._length} vs {other._length}')

    def __xor__(self, other: 'BitVector') -> 'BitVector':
        self._check_same_length(other)
        return BitVector._from_words(self._words ^ other._words, self._length)

    def __and__(self, other: 'BitVector') -> 'BitVector':
        self._check_same_length(other)
        return BitVector._from_words(self._words & other._words, self._length)

    def dot(self, other: 'BitVector') -> int:
        self._check_same_length(other)
        return int(_popcount_parity(self._words & other._words))

    def weight(self) -> int:
        return int(self.bits.sum())

    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.bits))

    def is_zero(self) -> bool:
        return not self._words.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._length == other._length and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def __repr__(self) -> str:
        return "BitVector('" + ''.join(str(b) for b in self.bits) + "')"


class BitMatrix:
    """Rectangular, immutable matrix over GF(2); rows are packed like BitVector."""

    __slots__ = ('_words', '_num_cols')

    def __init__(self, rows: Iterable = (), num_cols: Optional[int] = None):
        if isinstance(rows, BitMatrix):
            self._set(rows._words, rows._num_cols)
            return
        if isinstance(rows, np.ndarray):
            row_list = list(rows) if rows.ndim == 2 else ([] if rows.size == 0 else None)
            if row_list is None:
                raise DimensionError('BitMatrix needs a two-dimensional bit array')
        else:
            row_list = list(rows)
        bit_rows: List[np.ndarray] = []
        for row in row_list:
            bit_rows.append(row.bits if isinstance(row, BitVector) else _as_bits(row))
        if bit_rows:
            widths = {r.shape[0] for r in bit_rows}
            if len(widths) != 1:
                raise DimensionError('BitMatrix rows must all have the same length')
            cols = widths.pop()
            if num_cols is not None and num_cols != cols:
                raise DimensionError(f'expected {num_cols} columns, got {cols}')
            self._set(_pack(np.vstack(bit_rows)), cols)
        else:
            cols = num_cols or 0
            self._set(np.zeros((0, _num_words(cols)), dtype=_WORD_DTYPE), cols)

    def _set(self, words: np.ndarray, num_cols: int):
        words = np.array(words, dtype=_WORD_DTYPE, copy=True)
        words.setflags(write=False)
        self._words = words
        self._num_cols = num_cols

    @classmethod
    def _from_words(cls, words: np.ndarray, num_cols: int) -> 'BitMatrix':
        mat = cls.__new__(cls)
        mat._set(words, num_cols)
        return mat

    @classmethod
    def zeros(cls, num_rows: int, num_cols: int) -> 'BitMatrix':
        return cls._from_words(np.zeros((num_rows, _num_words(num_cols)), dtype=_WORD_DTYPE), num_cols)

    @classmethod
    def identity(cls, n: int) -> 'BitMatrix':
        return cls(np.eye(n, dtype=np.uint8), num_cols=n)

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self._words.shape[0]), self._num_cols)

    @property
    def num_rows(self) -> int:
        return int(self._words.shape[0])

    @property
    def num_cols(self) -> int:
        return self._num_cols

    def to_array(self) -> np.ndarray:
        if self.num_rows == 0:
            return np.zeros((0, self._num_cols), dtype=np.uint8)
        return _unpack(self._words, self._num_cols).copy()

    @property
    def rows(self) -> Tuple[BitVector, ...]:
        return tuple(self[i] for i in range(self.num_rows))

    def __getitem__(self, i: int) -> BitVector:
        return BitVector._from_words(self._words[i], self._num_cols)

    def __len__(self) -> int:
        return self.num_rows

    def __matmul__(self, vec: BitVector) -> BitVector:
        if not isinstance(vec, BitVector):
            return NotImplemented
        if vec.length != self._num_cols:
            raise DimensionError(f'matrix has {self._num_cols} columns, vector has length {vec.length}')
        if self.num_rows == 0:
            return BitVector.zeros(0)
        return BitVector(_popcount_parity(self._words & vec._words[np.newaxis, :]))

    def transpose(self) -> 'BitMatrix':
        return BitMatrix(self.to_array().T.copy(), num_cols=self.num_rows)

    def hstack(self, other: 'BitMatrix') -> 'BitMatrix':
        if self.num_rows != other.num_rows:
            raise DimensionError('hstack needs equal row counts')
        return BitMatrix(np.hstack([self.to_array(), other.to_array()]),
                         num_cols=self._num_cols + other.num_cols)

    def vstack(self, other: 'BitMatrix') -> 'BitMatrix':
        if self._num_cols != other.num_cols:
            raise DimensionError('vstack needs equal column counts')
        return BitMatrix._from_words(np.vstack([self._words, other._words]), self._num_cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        body = ', '.join("'" + ''.join(str(b) for b in row) + "'" for row in self.to_array())
        return f'BitMatrix([{body}])'


def _rref_words(words: np.ndarray, num_cols: int) -> Tuple[np.ndarray, List[int]]:
    words = np.array(words, dtype=_WORD_DTYPE, copy=True)
    num_rows = words.shape[0]
    pivots: List[int] = []
    r = 0
    for col in range(num_cols):
        if r == num_rows:
            break
        w, b = divmod(col, WORD)
        mask = np.uint64(1) << np.uint64(b)
        hits = np.flatnonzero(words[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
        others = np.flatnonzero(words[:, w] & mask)
        others = others[others != r]
        if others.size:
            words[others] ^= words[r]
        pivots.append(col)
        r += 1
    return words, pivots


def rref(m: BitMatrix) -> Tuple[BitMatrix, Tuple[int, ...]]:
    """Reduced row-echelon form and the pivot columns, in increasing order.

    The row count is preserved; dependent rows end up as zero rows at the bottom.
    """
    words, pivots = _rref_words(m._words, m.num_cols)
    return BitMatrix._from_words(words, m.num_cols), tuple(pivots)


def rank(m: BitMatrix) -> int:
    if m.num_rows == 0 or m.num_cols == 0:
        return 0
    return len(_rref_words(m._words, m.num_cols)[1])


def solve(a: BitMatrix, b: BitVector) -> Optional[BitVector]:
    """Solve a·x = b; free variables are fixed to 0. Returns None when inconsistent."""
    if a.num_rows != b.length:
        raise DimensionError(f'system has {a.num_rows} equations but right-hand side has length {b.length}')
    if a.num_rows == 0:
        return BitVector.zeros(a.num_cols)
    augmented = a.hstack(BitMatrix([b]).transpose())
    reduced, pivots = rref(augmented)
    if pivots and pivots[-1] == a.num_cols:
        return None
    rhs = reduced.to_array()[:, a.num_cols]
    x = np.zeros(a.num_cols, dtype=np.uint8)
    for row, col in enumerate(pivots):
        x[col] = rhs[row]
    return BitVector(x)


def nullspace(m: BitMatrix) -> BitMatrix:
    """Basis (as rows) of {x : m·x = 0}, one row per free column."""
    n = m.num_cols
    if m.num_rows == 0:
        return BitMatrix.identity(n)
    reduced, pivots = rref(m)
    arr = reduced.to_array()
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = arr[row, f]
    return BitMatrix(basis, num_cols=n)


def in_row_space(m: BitMatrix, v: BitVector) -> bool:
    if m.num_rows == 0:
        return v.is_zero()
    return rank(m.vstack(BitMatrix([v]))) == rank(m)
