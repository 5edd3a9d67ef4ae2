import logging
import threading
import time

from flask import Flask, jsonify, request
from flask_cors import CORS

from paritycode.config import config
from paritycode.errors import CodeFormatError, ParityCodeError
from paritycode.run_service import run_service

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

# exit code of the error hierarchy -> HTTP status
STATUS_FOR_EXIT_CODE = {1: 422, 2: 400, 3: 413, 4: 409}


def _payload():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise CodeFormatError('request body must be a JSON object')
    return data


def _error(e: Exception):
    if isinstance(e, ParityCodeError):
        body = {'error': str(e), 'type': type(e).__name__, 'exit_code': e.exit_code}
        for attr in ('offending', 'qubits'):
            if hasattr(e, attr):
                body[attr] = list(getattr(e, attr))
        return jsonify(body), STATUS_FOR_EXIT_CODE.get(e.exit_code, 500)
    if isinstance(e, KeyError):
        return jsonify({'error': f'missing field {e}'}), 400
    logger.exception('unhandled error')
    return jsonify({'error': str(e)}), 500


def _respond(build):
    """Run the manifest built from the request and return its report."""
    try:
        data = _payload()
        manifest = build(data)
        outcome = run_service.execute(manifest, record=bool(data.get('record', True)))
        return app.response_class(outcome.text, mimetype='application/json')
    except Exception as e:
        return _error(e)


@app.route('/api/layout', methods=['POST'])
def layout():
    """LHZ layout: {"k": 3}"""
    return _respond(lambda d: run_service.layout_manifest(d['k']))


@app.route('/api/labels', methods=['POST'])
def labels():
    """{"code": {...}, "seeds": "0:1,1:2"}"""
    return _respond(lambda d: run_service.labels_manifest(d['code'], d.get('seeds')))


@app.route('/api/pcnot', methods=['POST'])
def pcnot():
    """{"blocks": {...}, "control": [1, 2], "target": 1, "copies": "transversal", "check": "both"}"""
    return _respond(lambda d: run_service.pcnot_manifest(d['blocks'], d['control'], d['target'],
                                                         d.get('copies'), d.get('check', 'both')))


@app.route('/api/rotate', methods=['POST'])
def rotate():
    """{"code": {...}, "label": [1, 3], "alpha": "pi/2", "backend": "statevector", "seed": 7}"""
    return _respond(lambda d: run_service.rotate_manifest(
        d['code'], d['label'], d['alpha'], d.get('backend', 'statevector'), d.get('rounds'),
        d.get('copy_size'), d.get('reactivate', False), d.get('correction'), d.get('seed')))


@app.route('/api/inject', methods=['POST'])
def inject():
    """{"blocks": {...}, "control": [1], "target": 1, "mode": "mc", "p": 0.01, "trials": 10000, "seed": 7}"""
    return _respond(lambda d: run_service.inject_manifest(
        d['blocks'], d['control'], d['target'], d.get('copies'), d.get('mode', 'exhaustive'),
        d.get('p'), d.get('trials'), d.get('seed'), d.get('workers')))


@app.route('/api/runs')
def list_runs():
    try:
        limit = request.args.get('limit', 20, type=int)
        return jsonify({'runs': run_service.store.latest_runs(limit, request.args.get('command'))})
    except Exception as e:
        return _error(e)


@app.route('/api/runs/<digest>')
def get_run(digest):
    """Stored run by manifest digest (or a unique prefix)"""
    try:
        stored = run_service.store.get_run(digest)
        if not stored:
            return jsonify({'error': f'no run with digest {digest}'}), 404
        return app.response_class(stored['report'], mimetype='application/json')
    except Exception as e:
        return _error(e)


# Cleanup task
def cleanup_old_runs():
    """Daily cleanup of old stored runs"""
    while True:
        try:
            removed = run_service.store.cleanup_old_runs(days=config.RUN_RETENTION_DAYS)
            logger.info(f'cleaned up {removed} stored run(s)')
        except Exception as e:
            logger.error(f'error cleaning up runs: {e}')
        time.sleep(86400)


if __name__ == '__main__':
    logging.basicConfig(level=config.LOG_LEVEL.upper(), format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logger.info('=' * 60)
    logger.info('Starting parity-code run server...')
    logger.info(f'Run store: {config.RUN_STORE_PATH} (kept {config.RUN_RETENTION_DAYS} days)')
    logger.info(f'State-vector guard: {config.ORACLE_MAX_QUBITS} qubits, decoder guard: {config.DECODER_MAX_QUBITS}')
    logger.info(f'Server running at: http://{config.SERVER_HOST}:{config.SERVER_PORT}')
    logger.info('=' * 60)

    threading.Thread(target=cleanup_old_runs, daemon=True).start()

    app.run(host=config.SERVER_HOST, port=config.SERVER_PORT)
