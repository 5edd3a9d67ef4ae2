"""
X-fault injection through Clifford protocol circuits

Faults sit on gate boundaries: position 0 is the circuit input and position
p + 1 the output of gate p. A fault is pushed to the end of the circuit by
conjugation and the X part of the residual is decoded block by block with
the exhaustive minimum-weight table. Propagation is linear, so Monte Carlo
trials combine precomputed single-fault residuals with GF(2) sums.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from paritycode.circuit import Circuit
from paritycode.code_model import ClassicalParityCode, LabelAssignment
from paritycode.config import config
from paritycode.errors import DimensionError, UnsupportedGateError, VerificationFailure
from paritycode.flow_tracking import forward_conjugate
from paritycode.pauli import PauliString
from paritycode.testkit import DecoderTable, build_decoder_table, logical_classes, syndrome_values

logger = logging.getLogger(__name__)

KINDS = ('no_error', 'correctable', 'detected', 'logical_error')


@dataclass(frozen=True)
class FaultLocation:
    position: int
    qubit: int
    pauli: str = 'X'

    def to_dict(self) -> Dict[str, Any]:
        return {'position': self.position, 'qubit': self.qubit, 'pauli': self.pauli}


@dataclass(frozen=True)
class FaultConfig:
    locations: Tuple[FaultLocation, ...] = ()
    p: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'locations', tuple(self.locations))
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise DimensionError(f'fault probability {self.p} outside [0, 1]')
        if any(loc.pauli != 'X' for loc in self.locations):
            raise UnsupportedGateError('only X faults are modelled')

    def to_dict(self) -> Dict[str, Any]:
        return {'locations': [loc.to_dict() for loc in self.locations], 'p': self.p, 'seed': self.seed}


@dataclass(frozen=True)
class CodeBlock:
    code: ClassicalParityCode
    assignment: LabelAssignment
    offset: int = 0

    @classmethod
    def of(cls, code: ClassicalParityCode, offset: int = 0) -> 'CodeBlock':
        return cls(code, code.assignment(), offset)

    @property
    def qubits(self) -> range:
        return range(self.offset, self.offset + self.code.n)


class Classification(NamedTuple):
    kind: str
    block: int
    syndrome: int
    correction: Tuple[int, ...]
    flipped: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'block': self.block, 'syndrome': self.syndrome,
                'correction': list(self.correction), 'flipped': [i + config.LABEL_BASE for i in self.flipped]}


def _check_clifford(c: Circuit):
    for gate in c.gates:
        if not gate.is_clifford:
            raise UnsupportedGateError(f'{gate.name} is not a Clifford gate; faults cannot be propagated through it')


def enumerate_single_faults(c: Circuit) -> List[FaultConfig]:
    """Input faults on every qubit, then one fault per output qubit of each gate."""
    _check_clifford(c)
    faults = [FaultConfig((FaultLocation(0, q),)) for q in range(c.num_qubits)]
    for position, gate in enumerate(c.gates):
        faults.extend(FaultConfig((FaultLocation(position + 1, q),)) for q in gate.qubits)
    return faults


def propagate_fault(c: Circuit, fault: FaultConfig) -> PauliString:
    """Residual Pauli at the circuit output (signs dropped)."""
    _check_clifford(c)
    residual = PauliString.identity(c.num_qubits)
    for loc in fault.locations:
        if not 0 <= loc.position <= len(c.gates) or not 0 <= loc.qubit < c.num_qubits:
            raise DimensionError(f'fault location {loc} outside the circuit')
        tail = Circuit(c.num_qubits, c.gates[loc.position:])
        residual = residual.times_up_to_phase(forward_conjugate(tail, PauliString.x_on(c.num_qubits, [loc.qubit])))
    return residual.unsigned()


def _x_mask(residual: PauliString, block: CodeBlock) -> int:
    bits = residual.x[block.offset:block.offset + block.code.n]
    return sum(1 << q for q in np.flatnonzero(bits))


def classify(residual: PauliString, code: ClassicalParityCode, assignment: Optional[LabelAssignment] = None,
             offset: int = 0, table: Optional[DecoderTable] = None, block: int = 0) -> Classification:
    """Decode the X part of ``residual`` on the block at ``offset``."""
    assignment = assignment or code.assignment()
    if residual.n < offset + code.n:
        raise DimensionError(f'residual on {residual.n} qubits, block ends at {offset + code.n}')
    table = table if table is not None else build_decoder_table(code, assignment)
    error = _x_mask(residual, CodeBlock(code, assignment, offset))
    if error == 0:
        return Classification('no_error', block, 0, (), ())
    syndrome = int(syndrome_values(np.array([error]), code)[0])
    correction, ambiguous = table.lookup(syndrome)
    net = error ^ int(table.correction[syndrome])
    cls = int(logical_classes(np.array([net]), assignment)[0])
    flipped = tuple(i for i in range(code.k) if cls >> i & 1)
    if ambiguous:
        kind = 'detected'
    elif flipped:
        kind = 'logical_error'
    else:
        kind = 'correctable'
    return Classification(kind, block, syndrome, correction, flipped)


@dataclass
class FaultReport:
    mode: str
    p: Optional[float] = None
    trials: Optional[int] = None
    rate: Optional[float] = None
    ci95: Optional[Tuple[float, float]] = None
    counterexample: Optional[Dict[str, Any]] = None
    ft: Optional[bool] = None
    failures: int = 0
    detected: int = 0
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            'mode': self.mode,
            'p': self.p,
            'trials': self.trials,
            'rate': self.rate,
            'ci95': None if self.ci95 is None else [self.ci95[0], self.ci95[1]],
            'counterexample': self.counterexample,
            'ft': self.ft,
            'failures': self.failures,
            'detected': self.detected,
        }
        out.update(self.extra)
        return out


def _blocks(blocks: Sequence[CodeBlock], n: int) -> Tuple[CodeBlock, ...]:
    blocks = tuple(blocks)
    for b in blocks:
        if b.offset + b.code.n > n:
            raise DimensionError(f'block at offset {b.offset} runs past the {n}-qubit register')
    return blocks


def exhaustive_ft_check(c: Circuit, blocks: Sequence[CodeBlock]) -> FaultReport:
    """Every single X fault must leave each block correctable (or detected); the first silent logical error fails."""
    blocks = _blocks(blocks, c.num_qubits)
    tables = [build_decoder_table(b.code, b.assignment) for b in blocks]
    faults = enumerate_single_faults(c)
    failures = 0
    detected = 0
    counterexample = None
    for fault in faults:
        residual = propagate_fault(c, fault)
        verdicts = [classify(residual, b.code, b.assignment, b.offset, t, idx)
                    for idx, (b, t) in enumerate(zip(blocks, tables))]
        bad = [v for v in verdicts if v.kind == 'logical_error']
        if any(v.kind == 'detected' for v in verdicts):
            detected += 1
        if bad:
            failures += 1
            if counterexample is None:
                counterexample = {'fault': fault.to_dict(), 'residual': residual.to_product(),
                                  'classification': bad[0].to_dict()}
    ft = failures == 0
    logger.info(f'exhaustive check: {len(faults)} faults, {failures} logical errors, {detected} detected')
    return FaultReport('exhaustive', ft=ft, counterexample=counterexample, failures=failures, detected=detected,
                       extra={'locations': len(faults)})


def _residual_matrix(c: Circuit) -> np.ndarray:
    """X parts of every single-fault residual, one row per location."""
    faults = enumerate_single_faults(c)
    return np.array([propagate_fault(c, f).x for f in faults], dtype=np.int64).reshape(len(faults), c.num_qubits)


class _BlockDecoder(NamedTuple):
    offset: int
    n: int
    stabilizers: np.ndarray  # (n, s) int64
    seeds: np.ndarray  # (n, k) int64
    table: DecoderTable

    def failures(self, errors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(silent logical error, ambiguous) flags per row of ``errors``."""
        local = errors[:, self.offset:self.offset + self.n]
        weights = 1 << np.arange(self.stabilizers.shape[1], dtype=np.int64)
        syndrome = ((local @ self.stabilizers) & 1) @ weights
        correction = self.table.correction[syndrome]
        corr_bits = (correction[:, np.newaxis] >> np.arange(self.n, dtype=np.int64)) & 1
        net = local ^ corr_bits
        flipped = ((net @ self.seeds) & 1).any(axis=1)
        ambiguous = self.table.ambiguous[syndrome]
        return flipped & ~ambiguous, ambiguous


def _decoder(block: CodeBlock) -> _BlockDecoder:
    code = block.code
    stabilizers = np.zeros((code.n, code.num_stabilizers), dtype=np.int64)
    for j, s in enumerate(code.stabilizers):
        stabilizers[list(s), j] = 1
    seeds = np.zeros((code.n, code.k), dtype=np.int64)
    for q, i in block.assignment.seeds.items():
        seeds[q, i] = 1
    return _BlockDecoder(block.offset, code.n, stabilizers, seeds, build_decoder_table(code, block.assignment))


def _run_chunk(residuals: np.ndarray, decoders: Sequence[_BlockDecoder], p: float, size: int,
               seed: int, chunk: int) -> Tuple[int, int]:
    rng = np.random.default_rng([seed, chunk])
    hits = (rng.random((size, residuals.shape[0])) < p).astype(np.int64)
    errors = (hits @ residuals) & 1
    failed = np.zeros(size, dtype=bool)
    flagged = np.zeros(size, dtype=bool)
    for decoder in decoders:
        silent, ambiguous = decoder.failures(errors)
        failed |= silent
        flagged |= ambiguous
    return int(failed.sum()), int((flagged & ~failed).sum())


def wilson_interval(failures: int, trials: int) -> Tuple[float, float]:
    ci = stats.binomtest(failures, trials).proportion_ci(confidence_level=0.95, method='wilson')
    return float(ci.low), float(ci.high)


def monte_carlo(c: Circuit, blocks: Sequence[CodeBlock], p: float, trials: int, seed: int,
                workers: Optional[int] = None, chunk: Optional[int] = None) -> FaultReport:
    """
    I.i.d. X faults with probability p at every single-fault location.

    Trials are split into chunks with generators seeded by (seed, chunk index),
    so the report does not depend on the number of workers.
    """
    if not 0.0 <= p <= 1.0:
        raise DimensionError(f'fault probability {p} outside [0, 1]')
    if trials < 1:
        raise DimensionError('monte carlo needs at least one trial')
    blocks = _blocks(blocks, c.num_qubits)
    workers = workers or config.MC_WORKERS
    chunk = chunk or config.MC_CHUNK_SIZE
    residuals = _residual_matrix(c)
    decoders = [_decoder(b) for b in blocks]

    sizes = [min(chunk, trials - start) for start in range(0, trials, chunk)]
    failures = 0
    detected = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, residuals, decoders, p, size, seed, idx) for idx, size in enumerate(sizes)]
        for future in as_completed(futures):
            f, d = future.result()
            failures += f
            detected += d
    rate = failures / trials
    logger.info(f'monte carlo p={p}: {failures}/{trials} logical errors, {detected} detected')
    return FaultReport('mc', p=p, trials=trials, rate=rate, ci95=wilson_interval(failures, trials),
                       failures=failures, detected=detected, extra={'seed': seed, 'locations': int(residuals.shape[0])})


class ScalingFit(NamedTuple):
    exponent: float
    prefactor: float


def fit_scaling_exponent(ps: Sequence[float], rates: Sequence[float], counts: Sequence[int]) -> ScalingFit:
    """Least-squares slope of log(rate) against log(p), weighted by sqrt(failure count)."""
    ps = np.asarray(ps, dtype=float)
    rates = np.asarray(rates, dtype=float)
    counts = np.asarray(counts, dtype=float)
    usable = rates > 0
    if usable.sum() < 2:
        raise VerificationFailure('need at least two nonzero rates to fit a scaling exponent')
    slope, intercept = np.polyfit(np.log(ps[usable]), np.log(rates[usable]), 1, w=np.sqrt(counts[usable]))
    return ScalingFit(float(slope), float(math.exp(intercept)))


def pcnot_blocks(control: ClassicalParityCode, target: ClassicalParityCode) -> Tuple[CodeBlock, CodeBlock]:
    return CodeBlock.of(control, 0), CodeBlock.of(target, control.n)
