import math

import numpy as np
import pytest

from paritycode.circuit import Circuit, Gate
from paritycode.code_model import ParityLabel, repetition_code
from paritycode.config import config
from paritycode.deformation import compose_traces
from paritycode.errors import (BackendError, CodeFormatError, DimensionError, GuardExceededError, LabelError,
                               ProtocolOrderError, UnsupportedGateError)
from paritycode.logical_gates import (BlockPair, GateRequest, RotationOptions, RotationProtocol, RotationStage,
                                      pcnot_circuit, pcnot_reference_unitary, rotation_protocol, syndrome_sweep,
                                      teleport_diagonal)
from paritycode.register import Outcomes, in_code_space
from paritycode.statevector import (StateVector, fidelity_up_to_phase, logical_action, protocol_logical_action,
                                    rotation_unitary)
from paritycode.tableau import prepare_code_state, same_stabilizer_group
from paritycode.testkit import CodeGeneratorSpec, random_code


def rotation_action(code, label, alpha, rng, **options):
    def evolve(sv):
        protocol = RotationProtocol(sv, code, label, alpha, RotationOptions(**options), Outcomes(rng))
        protocol.run()
        return protocol.code, None
    return protocol_logical_action(code, None, evolve)


class TestGateRequest:

    def test_valid(self):
        request = GateRequest('rotation', rotation_label=ParityLabel.of(0, 1), angle=0.3)
        assert request.backend == 'statevector'

    @pytest.mark.parametrize('kwargs, error', [
        ({'kind': 'toffoli'}, UnsupportedGateError),
        ({'kind': 'pcnot', 'target_logical': 0}, CodeFormatError),
        ({'kind': 'rotation', 'rotation_label': ParityLabel.of(0), 'angle': math.inf}, CodeFormatError),
        ({'kind': 'teleport_t', 'backend': 'tableau'}, BackendError),
        ({'kind': 'teleport_s', 'backend': 'gpu'}, BackendError),
    ])
    def test_invalid(self, kwargs, error):
        with pytest.raises(error):
            GateRequest(**kwargs)


class TestPcnot:

    def test_transversal_repetition(self, rep3):
        blocks = BlockPair(rep3, rep3)
        circuit = pcnot_circuit(blocks, ParityLabel.of(0), 0)
        assert [g.qubits for g in circuit.gates] == [(0, 3), (1, 4), (2, 5)]
        assert circuit.metadata['transversal'] and circuit.metadata['fault_tolerant']
        report = logical_action(blocks.joint_code(), blocks.joint_assignment(), circuit)
        assert report.block_preserving
        np.testing.assert_allclose(report.logical_unitary, pcnot_reference_unitary(ParityLabel.of(0), 1, 2),
                                   atol=1e-12)

    def test_parity_control_fans_out(self, triangle_code, rep3):
        blocks = BlockPair(triangle_code, rep3)
        circuit = pcnot_circuit(blocks, ParityLabel.of(0, 1), 0)
        assert [g.qubits for g in circuit.gates] == [(2, 3), (2, 4), (2, 5)]
        assert circuit.metadata['copies'] == 1
        assert not circuit.metadata['fault_tolerant']
        report = logical_action(blocks.joint_code(), blocks.joint_assignment(), circuit)
        assert fidelity_up_to_phase(report.logical_unitary,
                                    pcnot_reference_unitary(ParityLabel.of(0, 1), 2, 3)) == pytest.approx(1.0)

    def test_lhz_target(self, rep3, lhz3):
        blocks = BlockPair(rep3, lhz3)
        circuit = pcnot_circuit(blocks, ParityLabel.of(0), 1)
        # logical 1 of the LHZ block lives on qubits 1, 3, 4
        assert [g.qubits for g in circuit.gates] == [(0, 4), (1, 6), (2, 7)]
        report = logical_action(blocks.joint_code(), blocks.joint_assignment(), circuit)
        np.testing.assert_allclose(report.logical_unitary, pcnot_reference_unitary(ParityLabel.of(0), 2, 4),
                                   atol=1e-12)

    def test_copy_counts(self, triangle_code, rep3):
        blocks = BlockPair(triangle_code, rep3)
        with pytest.raises(UnsupportedGateError):
            pcnot_circuit(blocks, ParityLabel.of(0, 1), 0, copies=3)
        with pytest.raises(UnsupportedGateError):
            pcnot_circuit(BlockPair(repetition_code(3), rep3), ParityLabel.of(0), 0, copies=2)

    def test_missing_label(self, triangle_code, rep3):
        with pytest.raises(LabelError):
            pcnot_circuit(BlockPair(rep3, triangle_code), ParityLabel.of(1), 0)

    @pytest.mark.parametrize('seed', range(60))
    def test_random_blocks(self, seed):
        rng = np.random.default_rng(seed)
        control, control_assignment = random_code(CodeGeneratorSpec((3, 6), (1, 3)), rng)
        target, target_assignment = random_code(CodeGeneratorSpec((2, 6), (1, 2)), rng)
        labels = sorted(set(control_assignment.labels), key=lambda label: label.indices)
        label = labels[int(rng.integers(len(labels)))]
        i = int(rng.integers(target.k))
        blocks = BlockPair(control, target, control_assignment, target_assignment)
        report = logical_action(blocks.joint_code(), blocks.joint_assignment(), pcnot_circuit(blocks, label, i))
        assert report.block_preserving
        expected = pcnot_reference_unitary(label, control.k + i, blocks.k_total)
        assert fidelity_up_to_phase(report.logical_unitary, expected) == pytest.approx(1.0)

    def test_commutes_with_control_phases_and_target_flips(self, triangle_code, rep3):
        blocks = BlockPair(triangle_code, rep3)
        label = ParityLabel.of(0, 1)
        pcnot = pcnot_circuit(blocks, label, 0)
        for other in (Circuit(blocks.n_total, (Gate.rz(0.7, 2),)),
                      Circuit(blocks.n_total, (Gate.x(3), Gate.x(4), Gate.x(5))),
                      Circuit(blocks.n_total, (Gate.rz(-1.3, 0), Gate.x(3), Gate.x(4), Gate.x(5)))):
            before = logical_action(blocks.joint_code(), blocks.joint_assignment(), pcnot.then(other))
            after = logical_action(blocks.joint_code(), blocks.joint_assignment(), other.then(pcnot))
            assert fidelity_up_to_phase(before.logical_unitary, after.logical_unitary) == pytest.approx(1.0)

        reference = pcnot_reference_unitary(label, 2, 3)
        phase = rotation_unitary(label, 0.7, 3)
        np.testing.assert_allclose(reference @ phase, phase @ reference, atol=1e-12)

    def test_reference_guards(self):
        with pytest.raises(LabelError):
            pcnot_reference_unitary(ParityLabel.of(0, 1), 1, 3)
        with pytest.raises(DimensionError):
            pcnot_reference_unitary(ParityLabel.of(0), 3, 3)


class TestTeleportation:

    def test_s_on_parity_qubit(self, triangle_code, rng):
        def evolve(sv):
            teleport_diagonal(sv, triangle_code, 2, 'S', Outcomes(rng))
            return triangle_code, None

        report = protocol_logical_action(triangle_code, None, evolve)
        expected = rotation_unitary(ParityLabel.of(0, 1), math.pi / 2, 2)
        assert fidelity_up_to_phase(report.logical_unitary, expected) == pytest.approx(1.0)

    @pytest.mark.parametrize('forced', [1, -1])
    def test_t_both_branches(self, triangle_code, forced):
        def evolve(sv):
            trace = teleport_diagonal(sv, triangle_code, 0, 'T', Outcomes(forced=[forced]))
            assert ('correction' in trace.kinds()) == (forced == -1)
            return triangle_code, None

        report = protocol_logical_action(triangle_code, None, evolve)
        expected = rotation_unitary(ParityLabel.of(0), math.pi / 4, 2)
        assert fidelity_up_to_phase(report.logical_unitary, expected) == pytest.approx(1.0)

    def test_t_needs_state_vector(self, triangle_code):
        with pytest.raises(BackendError):
            teleport_diagonal(prepare_code_state(triangle_code, '00'), triangle_code, 2, 'T', Outcomes(forced=[1]))

    def test_unknown_kind(self, triangle_code):
        with pytest.raises(UnsupportedGateError):
            teleport_diagonal(prepare_code_state(triangle_code, '00'), triangle_code, 2, 'H', Outcomes(forced=[1]))


class TestRotation:

    @pytest.mark.parametrize('alpha', [0.0, 0.37, math.pi / 2, -2.1])
    def test_matches_reference(self, triangle_code, rng, alpha):
        report = rotation_action(triangle_code, ParityLabel.of(0, 1), alpha, rng, correction='physical')
        assert report.block_preserving
        assert fidelity_up_to_phase(report.logical_unitary,
                                    rotation_unitary(ParityLabel.of(0, 1), alpha, 2)) == pytest.approx(1.0)

    @pytest.mark.parametrize('options', [
        {'copy_size': 2, 'rounds': 2},
        {'reactivate': True},
        {'correction': 'frame'},
        {'copy_size': 3, 'correction': 'frame', 'reactivate': True},
    ])
    def test_variants(self, lhz3, rng, options):
        report = rotation_action(lhz3, ParityLabel.of(0, 2), 0.9, rng, **options)
        assert fidelity_up_to_phase(report.logical_unitary,
                                    rotation_unitary(ParityLabel.of(0, 2), 0.9, 3)) == pytest.approx(1.0)

    @pytest.mark.parametrize('alpha', np.linspace(-math.pi, math.pi, 20))
    def test_angle_sweep(self, lhz3, rng, alpha):
        report = rotation_action(lhz3, ParityLabel.of(0, 2), alpha, rng)
        assert report.block_preserving
        assert fidelity_up_to_phase(report.logical_unitary,
                                    rotation_unitary(ParityLabel.of(0, 2), alpha, 3)) == pytest.approx(1.0)

    @pytest.mark.parametrize('alpha, beta, correction', [
        (0.4, 1.1, 'physical'),
        (math.pi / 3, -math.pi / 5, 'physical'),
        (2.5, 0.9, 'frame'),
    ])
    def test_rotations_compose(self, triangle_code, rng, alpha, beta, correction):
        label = ParityLabel.of(0, 1)

        def evolve(sv):
            code = triangle_code
            for angle in (alpha, beta):
                protocol = RotationProtocol(sv, code, label, angle, RotationOptions(correction=correction),
                                            Outcomes(rng))
                protocol.run()
                code = protocol.code
            return code, None

        report = protocol_logical_action(triangle_code, None, evolve)
        assert report.block_preserving
        assert fidelity_up_to_phase(report.logical_unitary,
                                    rotation_unitary(label, alpha + beta, 2)) == pytest.approx(1.0)

    def test_trace_shape(self, triangle_code, rng):
        state = prepare_code_state(triangle_code, '00', plus=[0, 1])
        trace = rotation_protocol(state, triangle_code, ParityLabel.of(0, 1), math.pi / 2,
                                  RotationOptions(rounds=1, correction='physical'), Outcomes(rng))
        assert trace.kinds() == ['add', 'sweep', 'exclude', 'gate', 'sweep', 'remove']
        assert trace.metadata['parity_qubit'] == 2
        assert all(e.data['all_plus'] for e in trace.events if e.kind == 'sweep')
        assert len(trace.forced_outcomes()) == len(trace.outcomes)
        assert in_code_space(state, triangle_code).passed

    def test_tableau_matches_teleported_s(self, triangle_code, rng):
        state = prepare_code_state(triangle_code, '00', plus=[0, 1])
        rotation_protocol(state, triangle_code, ParityLabel.of(0, 1), math.pi / 2, outcomes=Outcomes(rng))
        reference = prepare_code_state(triangle_code, '00', plus=[0, 1])
        teleport_diagonal(reference, triangle_code, 2, 'S', Outcomes(rng))
        assert same_stabilizer_group(state, reference)

    def test_replay_is_exact(self, triangle_code, rng):
        first = prepare_code_state(triangle_code, '00', plus=[0, 1])
        trace = rotation_protocol(first, triangle_code, ParityLabel.of(0, 1), math.pi, outcomes=Outcomes(rng))
        second = prepare_code_state(triangle_code, '00', plus=[0, 1])
        replay = rotation_protocol(second, triangle_code, ParityLabel.of(0, 1), math.pi,
                                   outcomes=Outcomes(forced=trace.forced_outcomes()))
        assert replay.to_json() == trace.to_json()

    def test_tableau_rejects_non_clifford_angle(self, triangle_code):
        with pytest.raises(BackendError):
            RotationProtocol(prepare_code_state(triangle_code, '00'), triangle_code, ParityLabel.of(0, 1), 0.3)

    def test_guard(self, triangle_code, monkeypatch):
        monkeypatch.setattr(config, 'ORACLE_MAX_QUBITS', 3)
        with pytest.raises(GuardExceededError):
            RotationProtocol(StateVector(3), triangle_code, ParityLabel.of(0, 1), 0.3)

    def test_unknown_label(self, lhz3):
        with pytest.raises(LabelError):
            RotationProtocol(StateVector(6), lhz3, ParityLabel.of(0, 1, 2), 0.3)

    def test_step_order(self, triangle_code, rng):
        protocol = RotationProtocol(StateVector(3), triangle_code, ParityLabel.of(0, 1), 0.3, outcomes=Outcomes(rng))
        with pytest.raises(ProtocolOrderError):
            protocol.exclude()
        protocol.add_copy()
        with pytest.raises(ProtocolOrderError):
            protocol.rotate()
        with pytest.raises(ProtocolOrderError):
            protocol.add_copy()
        protocol.exclude()
        with pytest.raises(ProtocolOrderError):
            protocol.remove_copy()
        protocol.rotate()
        protocol.remove_copy()
        assert protocol.stage is RotationStage.REMOVED
        protocol.finish()

    def test_copy_sequences_are_single_qubit(self):
        with pytest.raises(UnsupportedGateError):
            RotationOptions(gate_sequence=(Gate.cnot(0, 1),))
        with pytest.raises(UnsupportedGateError):
            RotationOptions(copy_size=2, gate_sequence=(Gate.h(0),))

    def test_reactivation_follows_cosine(self, triangle_code):
        """Measuring the connecting check after H·RZ(a)·H on the copy gives +1 with mean cos a."""
        rng = np.random.default_rng(99)
        a = 1.0
        options = RotationOptions(gate_sequence=(Gate.h(0), Gate.rz(a, 0), Gate.h(0)), reactivate=True,
                                  correction='physical')
        values = []
        for _ in range(500):
            protocol = RotationProtocol(StateVector(3), triangle_code, ParityLabel.of(0, 1), a, options, Outcomes(rng))
            protocol.add_copy()
            protocol.exclude()
            protocol.rotate()
            protocol.reactivate()
            values.append(protocol.trace.events[-1].data['outcome'])
        sigma = math.sqrt(1 - math.cos(a) ** 2) / math.sqrt(len(values))
        assert abs(np.mean(values) - math.cos(a)) < 3 * sigma

    def test_disjoint_rotations_compose(self, lhz3, rng):
        traces = []

        def evolve(sv):
            code = lhz3
            for label, alpha in ((ParityLabel.of(0, 1), 0.4), (ParityLabel.of(1, 2), -1.1)):
                protocol = RotationProtocol(sv, code, label, alpha, RotationOptions(correction='physical'),
                                            Outcomes(rng))
                traces.append(protocol.run())
                code = protocol.code
            return code, None

        report = protocol_logical_action(lhz3, None, evolve)
        expected = (rotation_unitary(ParityLabel.of(0, 1), 0.4, 3)
                    @ rotation_unitary(ParityLabel.of(1, 2), -1.1, 3))
        assert fidelity_up_to_phase(report.logical_unitary, expected) == pytest.approx(1.0)
        merged = compose_traces(*traces)
        assert len(merged.events) == sum(len(t.events) for t in traces)
        assert {e.data['region'] for e in merged.events} == {0, 1}


class TestSyndromeSweep:

    def test_all_plus_in_code_space(self, lhz3):
        state = prepare_code_state(lhz3, '101')
        record = syndrome_sweep(state, lhz3, [1], Outcomes(forced=[]))
        assert record.all_plus
        assert [idx for idx, _ in record.outcomes] == [0, 2]
        assert record.excluded == (1,)
