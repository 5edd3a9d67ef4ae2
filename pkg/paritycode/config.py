"""
Configuration settings for the parity-code toolkit
"""
import os

__version__ = '0.3.0'


def _env_flag(name: str, default: str = 'False') -> bool:
    return os.environ.get(name, default).lower() in ('1', 'true', 'yes')


class Config:
    # Rendering of logical indices in files, reports and CLI arguments
    LABEL_BASE = int(os.environ.get('PARITYCODE_LABEL_BASE', '1'))

    # Exhaustive-computation guards
    ORACLE_MAX_QUBITS = int(os.environ.get('PARITYCODE_ORACLE_MAX_QUBITS', '14'))
    DECODER_MAX_QUBITS = int(os.environ.get('PARITYCODE_DECODER_MAX_QUBITS', '20'))
    DISTANCE_MAX_K = int(os.environ.get('PARITYCODE_DISTANCE_MAX_K', '20'))
    REFERENCE_MAX_K = 12

    # Deformation and rotation protocol
    CORRECTION_MODE = os.environ.get('PARITYCODE_CORRECTION_MODE', 'physical')  # or 'frame'
    SYNDROME_ROUNDS = int(os.environ.get('PARITYCODE_SYNDROME_ROUNDS', '1'))
    COPY_SIZE = int(os.environ.get('PARITYCODE_COPY_SIZE', '1'))

    # Numerical tolerances
    LEAKAGE_TOLERANCE = 1e-9
    NORM_TOLERANCE = 1e-12
    DETERMINISM_TOLERANCE = 1e-10

    # Monte Carlo fault injection
    MC_CHUNK_SIZE = int(os.environ.get('PARITYCODE_MC_CHUNK_SIZE', '10000'))
    MC_WORKERS = int(os.environ.get('PARITYCODE_MC_WORKERS', '4'))

    # Tableau invariant checks ("debug builds")
    CHECK_INVARIANTS = _env_flag('PARITYCODE_DEBUG')

    # Run store
    RUN_STORE_PATH = os.environ.get(
        'PARITYCODE_RUN_STORE',
        os.path.join(os.path.dirname(os.path.dirname(__file__)), 'runs.db'),
    )
    RUN_RETENTION_DAYS = int(os.environ.get('PARITYCODE_RUN_RETENTION_DAYS', '30'))

    # HTTP server
    SERVER_HOST = os.environ.get('PARITYCODE_HOST', '127.0.0.1')
    SERVER_PORT = int(os.environ.get('PARITYCODE_PORT', '5000'))

    # Logging
    LOG_LEVEL = os.environ.get('PARITYCODE_LOG_LEVEL', 'INFO')

    TOOL_VERSION = __version__

# Create config instance
config = Config()
