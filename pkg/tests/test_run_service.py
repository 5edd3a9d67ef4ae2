import json
import math

import pytest

from paritycode.code_model import ClassicalParityCode
from paritycode.database import RunStore
from paritycode.errors import (BackendError, CodeFormatError, DimensionError, InconsistentLabelsError, SeedError,
                               UnderdeterminedLabelsError)
from paritycode.run_service import RunManifest, RunService, parse_angle, parse_seeds, render_report


@pytest.fixture
def service(run_store):
    return RunService()


@pytest.fixture
def rep_blocks(rep3):
    return {'control': rep3.to_dict(), 'target': rep3.to_dict()}


class TestParsing:

    @pytest.mark.parametrize('text, value', [
        ('0.3', 0.3), (0.3, 0.3), ('pi/2', math.pi / 2), ('-3pi/4', -3 * math.pi / 4), ('0.5*pi', math.pi / 2),
        ('π', math.pi), ('-pi', -math.pi), (2, 2.0),
    ])
    def test_angles(self, text, value):
        assert parse_angle(text) == pytest.approx(value)

    @pytest.mark.parametrize('text', ['inf', 'abc', 'pi/0', 'nan'])
    def test_bad_angles(self, text):
        with pytest.raises(CodeFormatError):
            parse_angle(text)

    def test_seeds(self):
        assert parse_seeds('0:1, 1:2') == {0: 1, 1: 2}
        assert parse_seeds([[3, 1]]) == {3: 1}
        assert parse_seeds(None) == {}

    @pytest.mark.parametrize('value', ['0-1', '0:a', [['x', 1]]])
    def test_bad_seeds(self, value):
        with pytest.raises(SeedError):
            parse_seeds(value)


class TestRunManifest:

    def test_digest_is_content_addressed(self, triangle_code):
        a = RunManifest('labels', {'seeds': None}, inputs={'code': triangle_code.to_dict()})
        b = RunManifest('labels', {'seeds': None}, inputs={'code': json.loads(triangle_code.to_json())})
        c = RunManifest('labels', {'seeds': [[0, 1]]}, inputs={'code': triangle_code.to_dict()})
        assert a.digest == b.digest
        assert a.digest != c.digest
        assert len(a.digest) == 64

    def test_round_trip(self, triangle_code):
        manifest = RunManifest('rotate', {'alpha': 0.5}, 7, {'code': triangle_code.to_dict()})
        again = RunManifest.from_dict(json.loads(manifest.to_json()))
        assert again.to_json() == manifest.to_json()
        assert again.digest == manifest.digest

    def test_tampered_inputs(self, triangle_code):
        data = RunManifest('labels', {}, inputs={'code': triangle_code.to_dict()}).to_dict()
        data['inputs']['code']['k'] = 1
        with pytest.raises(CodeFormatError):
            RunManifest.from_dict(data)

    def test_unknown_command(self):
        with pytest.raises(CodeFormatError):
            RunManifest('teleport')


class TestCommands:

    def test_layout(self, service):
        outcome = service.execute(service.layout_manifest(3))
        assert outcome.passed
        assert outcome['result']['n'] == 6
        assert outcome['result']['stabilizer_weights'] == [3, 3, 3]
        assert ClassicalParityCode.from_dict(outcome['result']['code']).k == 3
        assert outcome.text == render_report(json.loads(outcome.text))

    def test_labels(self, service, triangle_code):
        outcome = service.execute(service.labels_manifest(triangle_code.without_labels().to_dict(), '0:1,1:2'))
        assert outcome['result']['labels'] == [[1], [2], [1, 2]]
        assert outcome['result']['seeds'] == [[0, 1], [1, 2]]
        assert outcome['result']['valid']

    def test_labels_automatic_seeds(self, service, lhz3):
        outcome = service.execute(service.labels_manifest(lhz3.to_dict()))
        assert outcome['result']['labels'] == [[1], [2], [3], [1, 2], [2, 3], [1, 3]]

    def test_labels_errors(self, service, triangle_code):
        with pytest.raises(UnderdeterminedLabelsError):
            service.execute(service.labels_manifest(triangle_code.to_dict(), '0:1'))
        bad = {'n': 3, 'k': 2, 'stabilizers': [[0, 1]]}
        with pytest.raises(InconsistentLabelsError):
            service.execute(service.labels_manifest(bad, '0:1,1:2'))

    def test_pcnot_transversal(self, service, rep_blocks):
        outcome = service.execute(service.pcnot_manifest(rep_blocks, '1', 1, 'transversal'))
        assert outcome.passed
        assert outcome['result']['oracle']['fidelity'] == pytest.approx(1.0)
        assert outcome['result']['faults']['ft']
        assert outcome['result']['metadata']['transversal']

    def test_pcnot_fan_out_fails_fault_check(self, service, triangle_code, rep3):
        blocks = {'control': triangle_code.to_dict(), 'target': rep3.to_dict()}
        outcome = service.execute(service.pcnot_manifest(blocks, [1, 2], 1, 'single'))
        assert outcome['result']['oracle']['passed']
        assert not outcome['result']['faults']['ft']
        assert not outcome.passed

    def test_pcnot_oracle_only(self, service, triangle_code, rep3):
        blocks = {'control': triangle_code.to_dict(), 'target': rep3.to_dict()}
        outcome = service.execute(service.pcnot_manifest(blocks, '{1,2}', 1, None, check='oracle'))
        assert outcome.passed
        assert 'faults' not in outcome['result']

    def test_pcnot_bad_target(self, service, rep_blocks):
        with pytest.raises(DimensionError):
            service.execute(service.pcnot_manifest(rep_blocks, '1', 2))

    def test_rotate_statevector(self, service, triangle_code):
        outcome = service.execute(service.rotate_manifest(triangle_code.to_dict(), '{1,2}', 'pi/3', seed=5))
        assert outcome.passed
        assert outcome['result']['check']['fidelity'] == pytest.approx(1.0)
        assert outcome['result']['sweeps_all_plus']
        assert outcome['manifest']['arguments']['alpha'] == pytest.approx(math.pi / 3)

    def test_rotate_tableau(self, service, lhz3):
        outcome = service.execute(service.rotate_manifest(lhz3.to_dict(), [1, 3], '-pi/2', backend='tableau',
                                                          seed=2, copy_size=2))
        assert outcome.passed
        assert outcome['result']['check'] == {'matches_teleported_s': True, 's_power': 3}

    def test_rotate_tableau_needs_clifford_angle(self, service, triangle_code):
        with pytest.raises(BackendError):
            service.execute(service.rotate_manifest(triangle_code.to_dict(), '1,2', 0.3, backend='tableau', seed=1))

    def test_rotate_gets_a_seed(self, service, triangle_code):
        manifest = service.rotate_manifest(triangle_code.to_dict(), '1', 0.2)
        assert isinstance(manifest.seed, int)
        assert manifest.arguments['correction'] == 'physical'

    def test_inject_exhaustive(self, service, rep_blocks):
        outcome = service.execute(service.inject_manifest(rep_blocks, '1', 1))
        assert outcome.passed
        assert outcome['result']['report']['ft']
        assert outcome['manifest']['seed'] is None

    def test_inject_monte_carlo(self, service, rep_blocks):
        manifest = service.inject_manifest(rep_blocks, '1', 1, mode='mc', p=0.02, trials=3000, seed=9, workers=2)
        first = service.execute(manifest)
        second = service.execute(manifest, record=False)
        assert first.text == second.text
        assert first['result']['report']['trials'] == 3000

    @pytest.mark.parametrize('kwargs, error', [
        ({'mode': 'mc'}, DimensionError),
        ({'mode': 'mc', 'p': 1.5}, DimensionError),
        ({'mode': 'sample'}, CodeFormatError),
    ])
    def test_inject_arguments(self, service, rep_blocks, kwargs, error):
        with pytest.raises(error):
            service.inject_manifest(rep_blocks, '1', 1, **kwargs)


class TestReplay:

    def test_replay_from_store(self, service, triangle_code):
        outcome = service.execute(service.rotate_manifest(triangle_code.to_dict(), '{1,2}', 0.8, seed=12,
                                                          correction='frame', reactivate=True))
        verdict = service.replay(dict(outcome))
        assert verdict['identical'] is True
        assert verdict['report'].text == outcome.text

    def test_replay_against_text(self, service, triangle_code):
        outcome = service.execute(service.rotate_manifest(triangle_code.to_dict(), '{1,2}', 0.8, seed=12),
                                  record=False)
        assert service.replay(outcome['manifest'], outcome.text + '\n')['identical'] is True
        assert service.replay(outcome['manifest'])['identical'] is None
        changed = outcome.text.replace('"seed": 12', '"seed": 13')
        assert service.replay(outcome['manifest'], changed)['identical'] is False

    def test_replay_digest(self, service):
        outcome = service.execute(service.layout_manifest(4))
        assert service.replay_digest(outcome['digest'][:10])['identical'] is True
        with pytest.raises(CodeFormatError):
            service.replay_digest('f' * 64)


class TestRunStore:

    def test_save_and_list(self, run_store):
        store = RunStore(run_store)
        store.save_run('ab' * 32, 'layout', {'command': 'layout'}, '{}')
        store.save_run('cd' * 32, 'labels', {'command': 'labels'}, '{"x": 1}')
        assert [r['command'] for r in store.latest_runs()] == ['labels', 'layout']
        assert [r['digest'] for r in store.latest_runs(command='layout')] == ['ab' * 32]
        stored = store.get_run('cdcd')
        assert stored['manifest'] == {'command': 'labels'}
        assert stored['report'] == '{"x": 1}'
        assert store.get_run('ee') is None

    def test_reopening_keeps_runs(self, run_store):
        RunStore(run_store).save_run('ab' * 32, 'layout', {'command': 'layout'}, '{}')
        store = RunStore(run_store)
        assert [r['digest'] for r in store.latest_runs()] == ['ab' * 32]
        conn = store.get_connection()
        row = conn.execute('SELECT command FROM runs').fetchone()
        conn.close()
        assert row['command'] == 'layout'

    def test_cleanup(self, run_store):
        store = RunStore(run_store)
        store.save_run('ab' * 32, 'layout', {}, '{}')
        assert store.cleanup_old_runs(days=30) == 0
        assert store.cleanup_old_runs(days=-1) == 1
        assert store.latest_runs() == []

    def test_service_follows_configured_path(self, service, run_store):
        assert service.store.db_path == run_store
