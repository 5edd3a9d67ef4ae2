import numpy as np
import pytest

from paritycode import gf2
from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ParityLabel, derive_labels, validate_labels
from paritycode.errors import CodeFormatError, EncoderError, UnsupportedGateError
from paritycode.flow_tracking import (canonical_encoder, code_from_encoding_circuit, conjugate_pauli,
                                      forward_conjugate, labels_from_encoding_circuit)
from paritycode.pauli import PauliString
from paritycode.testkit import CodeGeneratorSpec, random_code

TRIANGLE_ENCODER = '''
QUBITS 3
INIT 0 L1
INIT 1 L2
INIT 2 0
CNOT 0 2
CNOT 1 2
'''


class TestConjugation:

    def test_heisenberg_picture(self):
        c = Circuit.parse(TRIANGLE_ENCODER)
        assert conjugate_pauli(c, PauliString.from_str('IIZ')) == PauliString.from_str('ZZZ')
        assert conjugate_pauli(c, PauliString.from_str('XII')) == PauliString.from_str('XIX')

    def test_forward_undoes_backward(self):
        c = Circuit(2, (Gate.h(0), Gate.s(0), Gate.cnot(0, 1), Gate.s(1)))
        for text in ('XZ', 'YI', 'ZY', '-XX'):
            p = PauliString.from_str(text)
            assert forward_conjugate(c, conjugate_pauli(c, p)) == p
            assert conjugate_pauli(c, forward_conjugate(c, p)) == p

    def test_non_clifford_rejected(self):
        c = Circuit(1, (Gate.rz(0.3, 0),))
        with pytest.raises(UnsupportedGateError):
            conjugate_pauli(c, PauliString.from_str('Z'))


class TestLabelsFromEncoder:

    def test_triangle_encoder(self):
        assignment = labels_from_encoding_circuit(Circuit.parse(TRIANGLE_ENCODER))
        assert assignment.labels == (ParityLabel.of(0), ParityLabel.of(1), ParityLabel.of(0, 1))
        assert assignment.seeds == {0: 0, 1: 1}

    def test_code_from_encoder(self, triangle_code):
        assert code_from_encoding_circuit(Circuit.parse(TRIANGLE_ENCODER)) == triangle_code

    def test_x_factors_rejected(self):
        c = Circuit.parse('QUBITS 2\nINIT 0 L1\nINIT 1 0\nH 1\nCNOT 0 1\n')
        with pytest.raises(EncoderError):
            labels_from_encoding_circuit(c)

    def test_missing_init(self):
        with pytest.raises(CodeFormatError):
            labels_from_encoding_circuit(Circuit.parse('QUBITS 2\nINIT 0 L1\nCNOT 0 1\n'))

    def test_logical_numbering(self):
        with pytest.raises(CodeFormatError):
            labels_from_encoding_circuit(Circuit.parse('QUBITS 2\nINIT 0 L1\nINIT 1 L3\n'))


class TestCanonicalEncoder:

    def test_round_trip_triangle(self, triangle_code):
        encoder = canonical_encoder(triangle_code)
        assert encoder.to_text() == Circuit.parse(TRIANGLE_ENCODER).to_text()

    def test_round_trip_lhz(self, lhz3):
        encoder = canonical_encoder(lhz3)
        assert encoder.is_clifford()
        assignment = labels_from_encoding_circuit(encoder)
        assert assignment.labels == lhz3.labels
        assert validate_labels(lhz3, assignment).passed

    def test_encoder_code_spans_same_group(self, lhz3):
        derived = code_from_encoding_circuit(canonical_encoder(lhz3))
        assert derived.labels == lhz3.labels
        assert set(derived.stabilizers) == {frozenset({0, 1, 3}), frozenset({1, 2, 4}), frozenset({0, 2, 5})}

    def test_random_codes(self):
        rng = np.random.default_rng(31)
        spec = CodeGeneratorSpec((2, 10), (1, 4))
        for _ in range(100):
            code, assignment = random_code(spec, rng)
            encoder = canonical_encoder(code, assignment)
            recovered = labels_from_encoding_circuit(encoder)
            assert recovered.labels == code.labels
            assert recovered.seeds == assignment.seeds
            assert derive_labels(code.without_labels(), assignment.seeds).labels == code.labels

            derived = code_from_encoding_circuit(encoder)
            joint = gf2.BitMatrix(derived.stabilizer_matrix().rows + code.stabilizer_matrix().rows, num_cols=code.n)
            assert gf2.rank(joint) == gf2.rank(code.stabilizer_matrix()) == derived.num_stabilizers
