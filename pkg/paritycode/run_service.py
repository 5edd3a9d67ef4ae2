"""
Run service: every command is a manifest in, a JSON report out

The CLI and the HTTP server both go through RunService.execute, so a stored
manifest replays to the same bytes regardless of the front-end.
"""
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from paritycode.code_model import (ClassicalParityCode, ParityLabel, derive_labels, lhz_layout, logical_x_support,
                                   validate_labels)
from paritycode.config import config
from paritycode.database import RunStore
from paritycode.deformation import ProtocolTrace
from paritycode.errors import BackendError, CodeFormatError, DimensionError, SeedError
from paritycode.fault_injection import exhaustive_ft_check, monte_carlo, pcnot_blocks
from paritycode.logical_gates import (BACKENDS, BlockPair, RotationOptions, RotationProtocol, pcnot_circuit,
                                      pcnot_reference_unitary, rotation_protocol, teleport_diagonal)
from paritycode.register import Outcomes
from paritycode.statevector import fidelity_up_to_phase, logical_action, protocol_logical_action, rotation_unitary
from paritycode.tableau import clifford_power, prepare_code_state, same_stabilizer_group

logger = logging.getLogger(__name__)

COMMANDS = ('layout', 'labels', 'pcnot', 'rotate', 'inject')
CHECKS = ('oracle', 'faults', 'both')
UNITARY_TOLERANCE = 1e-10
ROTATION_TOLERANCE = 1e-9

_ANGLE = re.compile(r'^([+-]?[\d.]*)\*?pi(?:/([\d.]+))?$')


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'), default=_builtin)


def render_report(report: Mapping[str, Any]) -> str:
    """The report text written to stdout and stored; replay compares it byte for byte."""
    return json.dumps(report, sort_keys=True, indent=2, default=_builtin)


def _builtin(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def derive_seed() -> int:
    """Fresh seed from OS entropy, for runs started without one."""
    return int(np.random.SeedSequence().entropy % (1 << 63))


def parse_angle(value) -> float:
    """Radians from a number or text such as '0.3', 'pi/2', '-3pi/4', '0.5*pi'."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        angle = float(value)
    else:
        text = str(value).strip().lower().replace('π', 'pi').replace(' ', '')
        match = _ANGLE.match(text)
        try:
            if match:
                coefficient = match.group(1)
                factor = {'': 1.0, '+': 1.0, '-': -1.0}.get(coefficient)
                factor = float(coefficient) if factor is None else factor
                angle = factor * math.pi / (float(match.group(2)) if match.group(2) else 1.0)
            else:
                angle = float(text)
        except (ValueError, ZeroDivisionError):
            raise CodeFormatError(f'cannot read angle {value!r}')
    if not math.isfinite(angle):
        raise CodeFormatError(f'angle must be finite, got {value!r}')
    return angle


def parse_seeds(value) -> Dict[int, int]:
    """'0:1,1:2' or [[0, 1], [1, 2]] -> {qubit: logical} with the logical in the external base."""
    if value is None:
        return {}
    if isinstance(value, str):
        pairs = []
        for item in value.replace(' ', '').split(','):
            if not item:
                continue
            qubit, sep, logical = item.partition(':')
            if not sep:
                raise SeedError(f'seed {item!r} is not qubit:logical')
            pairs.append((qubit, logical))
    else:
        pairs = [tuple(p) for p in value]
    seeds = {}
    try:
        for qubit, logical in pairs:
            seeds[int(qubit)] = int(logical)
    except (TypeError, ValueError):
        raise SeedError(f'cannot read seeds {value!r}')
    return seeds


@dataclass(frozen=True)
class RunManifest:
    """Everything a run depends on. Input documents are embedded so a manifest replays on its own."""
    command: str
    arguments: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    inputs: Dict[str, Any] = field(default_factory=dict)
    tool_version: str = config.TOOL_VERSION

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise CodeFormatError(f'unknown command {self.command!r}')

    @property
    def input_digests(self) -> Dict[str, str]:
        return {name: sha256_hex(canonical_json(doc)) for name, doc in self.inputs.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'arguments': dict(self.arguments),
            'seed': self.seed,
            'inputs': dict(self.inputs),
            'input_digests': self.input_digests,
            'tool_version': self.tool_version,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @property
    def digest(self) -> str:
        return sha256_hex(self.to_json())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'RunManifest':
        if not isinstance(data, Mapping) or 'command' not in data:
            raise CodeFormatError('manifest needs a "command"')
        manifest = cls(data['command'], dict(data.get('arguments') or {}), data.get('seed'),
                       dict(data.get('inputs') or {}), data.get('tool_version', config.TOOL_VERSION))
        recorded = data.get('input_digests')
        if recorded is not None and recorded != manifest.input_digests:
            raise CodeFormatError('embedded inputs do not match their recorded digests')
        return manifest


class RunOutcome(dict):
    """Report dict plus its rendered text."""

    @property
    def text(self) -> str:
        return render_report(self)

    @property
    def passed(self) -> bool:
        return bool(self.get('passed', True))


def _labelled(code: ClassicalParityCode) -> ClassicalParityCode:
    if code.labels is not None:
        return code
    return code.with_labels(derive_labels(code).labels)


def load_code(doc) -> ClassicalParityCode:
    return _labelled(ClassicalParityCode.from_dict(doc))


def load_blocks(doc) -> BlockPair:
    pair = BlockPair.from_dict(doc)
    return BlockPair(_labelled(pair.control), _labelled(pair.target))


def _sweeps_all_plus(trace: ProtocolTrace) -> bool:
    return all(e.data.get('all_plus', True) for e in trace.events if e.kind == 'sweep')


class RunService:
    def __init__(self, store: Optional[RunStore] = None):
        self._store = store
        self._handlers: Dict[str, Callable[[RunManifest], Tuple[Dict[str, Any], bool]]] = {
            'layout': self._layout,
            'labels': self._labels,
            'pcnot': self._pcnot,
            'rotate': self._rotate,
            'inject': self._inject,
        }

    @property
    def store(self) -> RunStore:
        """Run store at config.RUN_STORE_PATH, reopened when the path changes."""
        if self._store is None or self._store.db_path != config.RUN_STORE_PATH:
            self._store = RunStore(config.RUN_STORE_PATH)
        return self._store

    # -- manifests ------------------------------------------------------------

    def layout_manifest(self, k: int) -> RunManifest:
        return RunManifest('layout', {'k': int(k)})

    def labels_manifest(self, code_doc, seeds=None) -> RunManifest:
        seeds = parse_seeds(seeds)
        return RunManifest('labels', {'seeds': sorted([q, j] for q, j in seeds.items()) or None},
                           inputs={'code': code_doc})

    def pcnot_manifest(self, blocks_doc, control, target: int, copies: Optional[str] = None,
                       check: str = 'both') -> RunManifest:
        label = ParityLabel.parse(control) if isinstance(control, str) else ParityLabel.from_list(control)
        return RunManifest('pcnot', {'control': label.to_list(), 'target': int(target), 'copies': copies,
                                     'check': check}, inputs={'blocks': blocks_doc})

    def rotate_manifest(self, code_doc, label, alpha, backend: str = 'statevector', rounds: Optional[int] = None,
                        copy_size: Optional[int] = None, reactivate: bool = False, correction: Optional[str] = None,
                        seed: Optional[int] = None) -> RunManifest:
        label = ParityLabel.parse(label) if isinstance(label, str) else ParityLabel.from_list(label)
        arguments = {
            'label': label.to_list(),
            'alpha': parse_angle(alpha),
            'backend': backend,
            'rounds': config.SYNDROME_ROUNDS if rounds is None else int(rounds),
            'copy_size': config.COPY_SIZE if copy_size is None else int(copy_size),
            'reactivate': bool(reactivate),
            'correction': correction or config.CORRECTION_MODE,
        }
        return RunManifest('rotate', arguments, derive_seed() if seed is None else int(seed), {'code': code_doc})

    def inject_manifest(self, blocks_doc, control, target: int, copies: Optional[str] = None,
                        mode: str = 'exhaustive', p: Optional[float] = None, trials: Optional[int] = None,
                        seed: Optional[int] = None, workers: Optional[int] = None) -> RunManifest:
        label = ParityLabel.parse(control) if isinstance(control, str) else ParityLabel.from_list(control)
        arguments = {'control': label.to_list(), 'target': int(target), 'copies': copies, 'mode': mode}
        if mode == 'mc':
            if p is None or not 0.0 <= float(p) <= 1.0:
                raise DimensionError(f'--p must lie in [0, 1], got {p}')
            arguments.update({'p': float(p), 'trials': int(trials or config.MC_CHUNK_SIZE), 'workers': workers})
            seed = derive_seed() if seed is None else int(seed)
        elif mode != 'exhaustive':
            raise CodeFormatError(f'unknown injection mode {mode!r}')
        else:
            seed = None
        return RunManifest('inject', arguments, seed, {'blocks': blocks_doc})

    # -- execution ------------------------------------------------------------

    def execute(self, manifest: RunManifest, record: bool = True) -> RunOutcome:
        result, passed = self._handlers[manifest.command](manifest)
        outcome = RunOutcome(manifest=manifest.to_dict(), digest=manifest.digest, result=result, passed=passed)
        logger.info(f'{manifest.command} run {manifest.digest[:12]}: {"passed" if passed else "FAILED"}')
        if record:
            self.store.save_run(manifest.digest, manifest.command, manifest.to_dict(), outcome.text)
        return outcome

    def replay(self, source: Mapping[str, Any], expected: Optional[str] = None) -> Dict[str, Any]:
        """Re-run a manifest (or the manifest inside a report) and compare against the expected report text."""
        data = source.get('manifest', source) if isinstance(source, Mapping) else None
        manifest = RunManifest.from_dict(data)
        if expected is None:
            stored = self.store.get_run(manifest.digest)
            expected = stored['report'] if stored else None
        outcome = self.execute(manifest, record=False)
        identical = None if expected is None else outcome.text == expected.rstrip('\n')
        if identical is False:
            logger.warning(f'replay of {manifest.digest[:12]} differs from the recorded report')
        return {'digest': manifest.digest, 'identical': identical, 'report': outcome}

    def replay_digest(self, digest: str) -> Dict[str, Any]:
        stored = self.store.get_run(digest)
        if stored is None:
            raise CodeFormatError(f'no stored run with digest {digest}')
        return self.replay(stored['manifest'], stored['report'])

    # -- commands -------------------------------------------------------------

    def _layout(self, manifest: RunManifest) -> Tuple[Dict[str, Any], bool]:
        code = lhz_layout(manifest.arguments['k'])
        return {'code': code.to_dict(), 'n': code.n, 'k': code.k,
                'stabilizer_weights': list(code.stabilizer_weights())}, True

    def _labels(self, manifest: RunManifest) -> Tuple[Dict[str, Any], bool]:
        code = ClassicalParityCode.from_dict(manifest.inputs['code'])
        pairs = manifest.arguments.get('seeds')
        seeds = None if not pairs else {q: j - config.LABEL_BASE for q, j in pairs}
        assignment = derive_labels(code.without_labels(), seeds)
        verdict = validate_labels(code, assignment)
        result = {
            'labels': assignment.to_lists(),
            'seeds': sorted([q, j + config.LABEL_BASE] for q, j in assignment.seeds.items()),
            'valid': verdict.passed,
            'rank': verdict.rank,
            'offending': list(verdict.offending),
        }
        return result, verdict.passed

    def _pcnot_circuit(self, manifest: RunManifest):
        blocks = load_blocks(manifest.inputs['blocks'])
        label = ParityLabel.from_list(manifest.arguments['control'])
        i = manifest.arguments['target'] - config.LABEL_BASE
        if not 0 <= i < blocks.target.k:
            raise DimensionError(f'target logical {manifest.arguments["target"]} outside the target block')
        copies = manifest.arguments.get('copies')
        if copies == 'transversal':
            count = len(logical_x_support(blocks.target_assignment, i))
        elif copies == 'single':
            count = 1
        elif copies is None:
            count = None
        else:
            raise CodeFormatError(f'unknown copy mode {copies!r}')
        return blocks, label, i, pcnot_circuit(blocks, label, i, count)

    def _pcnot(self, manifest: RunManifest) -> Tuple[Dict[str, Any], bool]:
        blocks, label, i, circuit = self._pcnot_circuit(manifest)
        check = manifest.arguments.get('check', 'both')
        if check not in CHECKS:
            raise CodeFormatError(f'unknown check {check!r}')
        result: Dict[str, Any] = {'circuit': circuit.to_text(), 'metadata': dict(circuit.metadata)}
        passed = True

        if check in ('oracle', 'both'):
            action = logical_action(blocks.joint_code(), blocks.joint_assignment(), circuit)
            reference = pcnot_reference_unitary(label, blocks.control.k + i, blocks.k_total)
            fidelity = fidelity_up_to_phase(reference, action.logical_unitary)
            ok = action.block_preserving and fidelity >= 1 - UNITARY_TOLERANCE
            result['oracle'] = {'fidelity': fidelity, 'leakage': action.leakage,
                                'block_preserving': action.block_preserving, 'passed': ok}
            passed = passed and ok

        if check in ('faults', 'both'):
            report = exhaustive_ft_check(circuit, pcnot_blocks(blocks.control, blocks.target))
            result['faults'] = report.to_dict()
            passed = passed and bool(report.ft)
        return result, passed

    def _rotate(self, manifest: RunManifest) -> Tuple[Dict[str, Any], bool]:
        args = manifest.arguments
        code = load_code(manifest.inputs['code'])
        assignment = code.assignment()
        label = ParityLabel.from_list(args['label'])
        alpha = float(args['alpha'])
        backend = args.get('backend', 'statevector')
        if backend not in BACKENDS:
            raise BackendError(f'unknown backend {backend!r}')
        options = RotationOptions(copy_size=args['copy_size'], rounds=args['rounds'],
                                  reactivate=args['reactivate'], correction=args['correction'])
        outcomes = Outcomes.seeded(manifest.seed)

        if backend == 'statevector':
            traces = []

            def evolve(sv):
                protocol = RotationProtocol(sv, code, label, alpha, options, outcomes)
                traces.append(protocol.run())
                return protocol.code, None

            action = protocol_logical_action(code, assignment, evolve)
            fidelity = fidelity_up_to_phase(rotation_unitary(label, alpha, code.k), action.logical_unitary)
            trace = traces[0]
            check = {'fidelity': fidelity, 'leakage': action.leakage, 'block_preserving': action.block_preserving}
            passed = action.block_preserving and fidelity >= 1 - ROTATION_TOLERANCE
        else:
            m = clifford_power(alpha)
            if m is None:
                raise BackendError(f'α={alpha} is not a multiple of π/2; use the state-vector backend')
            plus = tuple(range(code.k))
            state = prepare_code_state(code, [0] * code.k, plus, assignment)
            trace = rotation_protocol(state, code, label, alpha, options, outcomes)
            reference = prepare_code_state(code, [0] * code.k, plus, assignment)
            parity_qubit = assignment.qubits_with(label)[0]
            teleports = Outcomes.seeded(manifest.seed)
            for _ in range(m):
                teleport_diagonal(reference, code, parity_qubit, 'S', teleports)
            matches = same_stabilizer_group(state, reference)
            check = {'matches_teleported_s': matches, 's_power': m}
            passed = matches

        sweeps_ok = _sweeps_all_plus(trace)
        result = {'trace': trace.to_dict(), 'check': check, 'sweeps_all_plus': sweeps_ok}
        return result, passed and sweeps_ok

    def _inject(self, manifest: RunManifest) -> Tuple[Dict[str, Any], bool]:
        blocks, _, _, circuit = self._pcnot_circuit(manifest)
        code_blocks = pcnot_blocks(blocks.control, blocks.target)
        args = manifest.arguments
        if args['mode'] == 'exhaustive':
            report = exhaustive_ft_check(circuit, code_blocks)
            passed = bool(report.ft)
        else:
            report = monte_carlo(circuit, code_blocks, args['p'], args['trials'], manifest.seed,
                                 workers=args.get('workers'))
            passed = True
        return {'metadata': dict(circuit.metadata), 'report': report.to_dict()}, passed


# Create global run service instance
run_service = RunService()
