"""
Command-line front-end

Every command builds a RunManifest, runs it through the run service and
prints the JSON report on stdout. Logs go to stderr. Exit codes: 0 success,
1 failing check, 2 usage or parse error, 3 guard exceeded, 4 protocol
violation.
"""
import json
import logging
import os
import sys

import click

from paritycode.config import __version__, config
from paritycode.errors import CodeFormatError, ParityCodeError
from paritycode.run_service import render_report, run_service

logger = logging.getLogger(__name__)


def _read_json(path: str):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise CodeFormatError(f'{path}: invalid JSON ({e})')


def _fail(error: ParityCodeError):
    payload = {'error': str(error), 'type': type(error).__name__, 'exit_code': error.exit_code}
    for attr in ('offending', 'qubits'):
        if hasattr(error, attr):
            payload[attr] = list(getattr(error, attr))
    click.echo(json.dumps(payload, sort_keys=True, indent=2))
    logger.error(f'{type(error).__name__}: {error}')
    sys.exit(error.exit_code)


def _run(ctx: click.Context, build):
    """Build the manifest, execute it and print the report."""
    try:
        manifest = build()
        outcome = run_service.execute(manifest, record=ctx.obj['record'])
    except ParityCodeError as e:
        _fail(e)
    click.echo(outcome.text)
    if not outcome.passed:
        logger.error(f'{manifest.command}: check failed')
        sys.exit(1)
    return outcome


def _copies(transversal):
    if transversal is None:
        return None
    return 'transversal' if transversal else 'single'


@click.group()
@click.version_option(__version__, prog_name='paritycode')
@click.option('--record/--no-record', default=True, help='Store the run in the run store.')
@click.option('--log-level', default=None, help='Overrides PARITYCODE_LOG_LEVEL.')
@click.pass_context
def cli(ctx: click.Context, record: bool, log_level):
    """Parity-code construction, logical gate protocols and fault injection."""
    logging.basicConfig(stream=sys.stderr, level=(log_level or config.LOG_LEVEL).upper(),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    ctx.ensure_object(dict)
    ctx.obj['record'] = record


@cli.command()
@click.option('--k', 'k', type=int, required=True, help='Number of logical qubits (>= 2).')
@click.option('--out', type=click.Path(dir_okay=False, writable=True), default=None,
              help='Write the code JSON here.')
@click.pass_context
def layout(ctx, k, out):
    """LHZ layout on k logical qubits."""
    outcome = _run(ctx, lambda: run_service.layout_manifest(k))
    if out:
        with open(out, 'w') as f:
            json.dump(outcome['result']['code'], f, indent=2)
        logger.info(f'wrote {outcome["result"]["n"]}-qubit code to {out}')


@cli.command()
@click.argument('code_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--seeds', default=None, help='Base qubits as qubit:logical pairs, e.g. "0:1,1:2".')
@click.pass_context
def labels(ctx, code_file, seeds):
    """Derive and validate the label assignment of a code."""
    _run(ctx, lambda: run_service.labels_manifest(_read_json(code_file), seeds))


@cli.command()
@click.argument('blocks_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--control', required=True, help='Control label, e.g. "1,2".')
@click.option('--target', type=int, required=True, help='Target logical of the second block.')
@click.option('--transversal/--single', default=None, help='One control copy per target qubit, or fan-out.')
@click.option('--check', type=click.Choice(['oracle', 'faults', 'both']), default='both')
@click.pass_context
def pcnot(ctx, blocks_file, control, target, transversal, check):
    """Parity-controlled NOT between two code blocks."""
    _run(ctx, lambda: run_service.pcnot_manifest(_read_json(blocks_file), control, target,
                                                 _copies(transversal), check))


@cli.command()
@click.argument('code_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--label', required=True, help='Rotation label, e.g. "1,3".')
@click.option('--alpha', required=True, help='Angle in radians; "pi/2" style accepted.')
@click.option('--backend', type=click.Choice(['statevector', 'tableau']), default='statevector')
@click.option('--rounds', type=click.IntRange(min=0), default=None, help='Trust-building syndrome rounds.')
@click.option('--copy-size', type=click.IntRange(min=1), default=None, help='Qubits in the protected copy.')
@click.option('--reactivate', is_flag=True, help='Measure the connecting stabilizer again before removal.')
@click.option('--correction', type=click.Choice(['physical', 'frame']), default=None)
@click.option('--seed', type=int, default=None)
@click.pass_context
def rotate(ctx, code_file, label, alpha, backend, rounds, copy_size, reactivate, correction, seed):
    """Many-body rotation exp(-i alpha/2 prod Z) through a protected copy."""
    _run(ctx, lambda: run_service.rotate_manifest(_read_json(code_file), label, alpha, backend, rounds,
                                                  copy_size, reactivate, correction, seed))


@cli.command()
@click.argument('blocks_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--control', required=True, help='Control label, e.g. "1,2".')
@click.option('--target', type=int, required=True)
@click.option('--transversal/--single', default=None)
@click.option('--mode', type=click.Choice(['exhaustive', 'mc']), default='exhaustive')
@click.option('--p', 'p', type=click.FloatRange(0.0, 1.0), default=None, help='Fault probability per location.')
@click.option('--trials', type=click.IntRange(min=1), default=None)
@click.option('--seed', type=int, default=None)
@click.option('--workers', type=click.IntRange(min=1), default=None)
@click.pass_context
def inject(ctx, blocks_file, control, target, transversal, mode, p, trials, seed, workers):
    """X-fault injection into a pcnot circuit."""
    if mode == 'mc' and p is None:
        raise click.UsageError('--mode mc needs --p')
    _run(ctx, lambda: run_service.inject_manifest(_read_json(blocks_file), control, target, _copies(transversal),
                                                  mode, p, trials, seed, workers))


@cli.command()
@click.argument('source')
@click.pass_context
def replay(ctx, source):
    """Re-run a manifest, a report file or a stored digest and compare the report bytes."""
    try:
        if os.path.exists(source):
            with open(source) as f:
                text = f.read()
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise CodeFormatError(f'{source}: invalid JSON ({e})')
            expected = text if isinstance(data, dict) and 'manifest' in data else None
            verdict = run_service.replay(data, expected)
        else:
            verdict = run_service.replay_digest(source)
    except ParityCodeError as e:
        _fail(e)

    click.echo(verdict['report'].text)
    if verdict['identical'] is False:
        logger.error(f'replay of {verdict["digest"][:12]} is not byte-identical')
        sys.exit(1)
    if verdict['identical'] is None:
        logger.warning('no recorded report to compare against')
    else:
        logger.info(f'replay of {verdict["digest"][:12]} is byte-identical')


@cli.command()
@click.option('--limit', type=int, default=20)
@click.option('--command', 'command', default=None)
def runs(limit, command):
    """List stored runs, newest first."""
    click.echo(render_report({'runs': run_service.store.latest_runs(limit, command)}))


def main():
    cli(obj={})


if __name__ == '__main__':
    main()
