import numpy as np
import pytest

from paritycode.circuit import Circuit, Gate, InitKind, PLUS, ZERO, logical_input
from paritycode.errors import CodeFormatError, DimensionError, UnsupportedGateError
from paritycode.pauli import PauliString


class TestPauliString:

    def test_parse_and_format(self):
        p = PauliString.from_str('-XZI')
        assert p.sign == -1
        assert str(p) == '-XZI'
        assert p.to_product() == '-X0*Z1'
        assert PauliString.from_product('X0*Z1', 3).unsigned() == p.unsigned()

    def test_bad_letter(self):
        with pytest.raises(CodeFormatError):
            PauliString.from_str('XQ')

    def test_repeated_factor(self):
        with pytest.raises(CodeFormatError):
            PauliString.from_product('Z0*X0', 2)

    def test_commuting_product_phase(self):
        assert PauliString.from_str('XX') * PauliString.from_str('ZZ') == PauliString.from_str('-YY')
        assert PauliString.from_str('ZZ') * PauliString.from_str('ZI') == PauliString.from_str('IZ')

    def test_anticommuting_product_rejected(self):
        with pytest.raises(ValueError):
            PauliString.from_str('X') * PauliString.from_str('Z')

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            PauliString.from_str('XX').commutes(PauliString.from_str('Z'))

    @pytest.mark.parametrize('gate, qubits, before, after', [
        ('H', (0,), 'X', 'Z'),
        ('H', (0,), 'Y', '-Y'),
        ('S', (0,), 'X', 'Y'),
        ('S', (0,), 'Z', 'Z'),
        ('CNOT', (0, 1), 'XI', 'XX'),
        ('CNOT', (0, 1), 'IZ', 'ZZ'),
        ('CNOT', (0, 1), 'ZI', 'ZI'),
    ])
    def test_conjugation_rules(self, gate, qubits, before, after):
        assert PauliString.from_str(before).conjugated(gate, qubits) == PauliString.from_str(after)

    @pytest.mark.parametrize('gate, qubits, text', [
        ('H', (0,), 'Y'), ('S', (0,), 'X'), ('CNOT', (1, 0), 'XY'),
    ])
    def test_conjugation_matches_matrices(self, gate, qubits, text):
        matrices = {
            'H': np.array([[1, 1], [1, -1]]) / np.sqrt(2),
            'S': np.diag([1, 1j]),
        }
        if gate == 'CNOT':
            # control 1, target 0; qubit 0 is the most significant bit
            u = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
        else:
            u = matrices[gate]
        p = PauliString.from_str(text)
        expected = u @ p.to_matrix() @ u.conj().T
        np.testing.assert_allclose(p.conjugated(gate, qubits).to_matrix(), expected, atol=1e-12)

    def test_inverse_s(self):
        p = PauliString.from_str('X')
        assert p.conjugated('S', (0,)).conjugated('S', (0,), inverse=True) == p

    def test_unknown_gate(self):
        with pytest.raises(UnsupportedGateError):
            PauliString.from_str('X').conjugated('T', (0,))


class TestCircuitText:

    TEXT = 'QUBITS 3\nINIT 0 L1\nINIT 1 L2\nINIT 2 0\nCNOT 0 2\nCNOT 1 2\n'

    def test_parse(self):
        circuit = Circuit.parse(self.TEXT)
        assert circuit.num_qubits == 3
        assert circuit.logical_inputs() == {0: 0, 1: 1}
        assert circuit.ancilla_init[2].kind is InitKind.ZERO
        assert [g.qubits for g in circuit.gates] == [(0, 2), (1, 2)]

    def test_text_is_stable(self):
        assert Circuit.parse(self.TEXT).to_text() == self.TEXT

    def test_comments_and_measurements(self):
        circuit = Circuit.parse('QUBITS 2  # header\nINIT 1 +\nRZ 0.5 0\nMPP Z0*Z1\nMX 1\n')
        assert circuit.has_measurements()
        assert not circuit.is_clifford()
        assert circuit.gates[0].angle == 0.5
        assert circuit.gates[1].pauli == PauliString.from_str('ZZ')
        assert circuit.ancilla_init == {1: PLUS}

    @pytest.mark.parametrize('text', [
        'CNOT 0 1\n',
        'QUBITS 2\nTOFFOLI 0 1\n',
        'QUBITS 2\nCNOT 0\n',
        'QUBITS 2\nCNOT 0 5\n',
        'QUBITS 2\nCNOT 1 1\n',
        'QUBITS 2\nRZ inf 0\n',
        'QUBITS 2\nINIT 0 L0\n',
    ])
    def test_rejects(self, text):
        with pytest.raises(CodeFormatError):
            Circuit.parse(text)

    def test_builder(self):
        circuit = Circuit(2, (Gate.h(0), Gate.cnot(0, 1)), {0: logical_input(0), 1: ZERO})
        assert circuit.is_clifford()
        assert len(circuit.then(Circuit(2, (Gate.mz(1),)))) == 3
        assert Circuit.parse(circuit.to_text()) == circuit
