import json

import pytest
from click.testing import CliRunner

from conftest import report_from_output
from paritycode.cli import cli
from paritycode.config import __version__, config
from paritycode.run_service import render_report


@pytest.fixture
def invoke():
    runner = CliRunner()

    def run(*args):
        return runner.invoke(cli, [str(a) for a in args], obj={})
    return run


@pytest.fixture
def rep_blocks_file(code_file, rep3):
    return code_file({'control': rep3.to_dict(), 'target': rep3.to_dict()}, 'blocks.json')


def test_version(invoke):
    result = invoke('--version')
    assert result.exit_code == 0
    assert __version__ in result.output


class TestLayout:

    def test_writes_code(self, invoke, tmp_path):
        out = tmp_path / 'lhz3.json'
        result = invoke('layout', '--k', 3, '--out', out)
        assert result.exit_code == 0, result.output
        report = report_from_output(result.output)
        assert report['result']['n'] == 6
        assert json.loads(out.read_text())['stabilizers'] == [[0, 1, 3], [1, 2, 4], [3, 4, 5]]

    def test_too_small(self, invoke):
        result = invoke('layout', '--k', 1)
        assert result.exit_code == 2
        assert report_from_output(result.output)['type'] == 'DimensionError'


class TestLabels:

    def test_seeded(self, invoke, code_file, triangle_code):
        result = invoke('labels', code_file(triangle_code.without_labels()), '--seeds', '0:1,1:2')
        assert result.exit_code == 0, result.output
        assert report_from_output(result.output)['result']['labels'] == [[1], [2], [1, 2]]

    def test_inconsistent(self, invoke, code_file):
        result = invoke('labels', code_file({'n': 3, 'k': 2, 'stabilizers': [[0, 1]]}), '--seeds', '0:1,1:2')
        assert result.exit_code == 1
        error = report_from_output(result.output)
        assert error['type'] == 'InconsistentLabelsError'
        assert error['offending'] == [0]

    def test_underdetermined(self, invoke, code_file, triangle_code):
        result = invoke('labels', code_file(triangle_code), '--seeds', '0:1')
        assert result.exit_code == 1
        assert report_from_output(result.output)['qubits'] == [1, 2]

    def test_non_integer_stabilizer_entry(self, invoke, code_file):
        result = invoke('labels', code_file({'n': 3, 'k': 2, 'stabilizers': [[0, 'a']]}), '--seeds', '0:1,1:2')
        assert result.exit_code == 2
        assert report_from_output(result.output)['type'] == 'CodeFormatError'

    def test_bad_json(self, invoke, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"n": 3,')
        result = invoke('labels', path)
        assert result.exit_code == 2
        assert report_from_output(result.output)['type'] == 'CodeFormatError'


class TestPcnot:

    def test_transversal(self, invoke, rep_blocks_file):
        result = invoke('pcnot', rep_blocks_file, '--control', '1', '--target', 1, '--transversal')
        assert result.exit_code == 0, result.output
        report = report_from_output(result.output)
        assert report['passed']
        assert report['result']['faults']['ft']

    def test_fan_out_fails(self, invoke, rep_blocks_file):
        result = invoke('pcnot', rep_blocks_file, '--control', '1', '--target', 1, '--single')
        assert result.exit_code == 1
        report = report_from_output(result.output)
        assert report['result']['oracle']['passed']
        assert not report['passed']


class TestRotate:

    def test_statevector(self, invoke, code_file, triangle_code):
        result = invoke('rotate', code_file(triangle_code), '--label', '1,2', '--alpha', 'pi/3', '--seed', 4)
        assert result.exit_code == 0, result.output
        assert report_from_output(result.output)['result']['check']['fidelity'] == pytest.approx(1.0)

    def test_tableau(self, invoke, code_file, lhz3):
        result = invoke('rotate', code_file(lhz3), '--label', '1,2', '--alpha', 'pi', '--backend', 'tableau',
                        '--rounds', 2, '--seed', 8)
        assert result.exit_code == 0, result.output
        assert report_from_output(result.output)['result']['check']['s_power'] == 2

    def test_tableau_rejects_non_clifford(self, invoke, code_file, triangle_code):
        result = invoke('rotate', code_file(triangle_code), '--label', '1,2', '--alpha', 0.3, '--backend', 'tableau')
        assert result.exit_code == 2
        assert report_from_output(result.output)['type'] == 'BackendError'

    def test_guard(self, invoke, code_file, triangle_code, monkeypatch):
        monkeypatch.setattr(config, 'ORACLE_MAX_QUBITS', 3)
        result = invoke('rotate', code_file(triangle_code), '--label', '1,2', '--alpha', 0.3)
        assert result.exit_code == 3
        assert report_from_output(result.output)['type'] == 'GuardExceededError'


class TestInject:

    def test_mc_needs_probability(self, invoke, rep_blocks_file):
        result = invoke('inject', rep_blocks_file, '--control', '1', '--target', 1, '--mode', 'mc')
        assert result.exit_code == 2

    def test_mc(self, invoke, rep_blocks_file):
        args = ('inject', rep_blocks_file, '--control', '1', '--target', 1, '--mode', 'mc', '--p', 0.05,
                '--trials', 2000, '--seed', 3)
        first = invoke(*args)
        second = invoke('--no-record', *args)
        assert first.exit_code == 0, first.output
        assert report_from_output(first.output) == report_from_output(second.output)
        assert report_from_output(first.output)['result']['report']['trials'] == 2000

    def test_exhaustive(self, invoke, rep_blocks_file):
        result = invoke('inject', rep_blocks_file, '--control', '1', '--target', 1)
        assert result.exit_code == 0, result.output
        assert report_from_output(result.output)['result']['report']['ft']


class TestReplayAndRuns:

    def test_replay_report_file(self, invoke, code_file, triangle_code, tmp_path):
        result = invoke('rotate', code_file(triangle_code), '--label', '1,2', '--alpha', 0.7, '--seed', 11,
                        '--reactivate')
        report = report_from_output(result.output)
        path = tmp_path / 'report.json'
        path.write_text(render_report(report) + '\n')
        assert invoke('replay', path).exit_code == 0

        report['result']['sweeps_all_plus'] = not report['result']['sweeps_all_plus']
        path.write_text(render_report(report))
        assert invoke('replay', path).exit_code == 1

    def test_replay_manifest_file(self, invoke, code_file, tmp_path):
        result = invoke('--no-record', 'layout', '--k', 4)
        manifest = report_from_output(result.output)['manifest']
        path = tmp_path / 'manifest.json'
        path.write_text(json.dumps(manifest))
        replayed = invoke('replay', path)
        assert replayed.exit_code == 0
        assert report_from_output(replayed.output)['result']['n'] == 10

    def test_replay_digest(self, invoke):
        digest = report_from_output(invoke('layout', '--k', 3).output)['digest']
        assert invoke('replay', digest[:16]).exit_code == 0
        missing = invoke('replay', 'f' * 64)
        assert missing.exit_code == 2

    def test_runs(self, invoke):
        invoke('layout', '--k', 3)
        invoke('--no-record', 'layout', '--k', 4)
        invoke('layout', '--k', 5)
        result = invoke('runs', '--command', 'layout')
        listed = report_from_output(result.output)['runs']
        assert len(listed) == 2
        assert all(r['command'] == 'layout' for r in listed)
