import json

import numpy as np
import pytest

from paritycode.code_model import ClassicalParityCode, ParityLabel, lhz_layout, repetition_code
from paritycode.config import config


@pytest.fixture(autouse=True)
def run_store(tmp_path, monkeypatch):
    """Every test gets its own run store."""
    path = str(tmp_path / 'runs.db')
    monkeypatch.setattr(config, 'RUN_STORE_PATH', path)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def triangle_code():
    """Three qubits, one stabilizer Z0 Z1 Z2, labels {0}, {1}, {0,1}."""
    labels = (ParityLabel.of(0), ParityLabel.of(1), ParityLabel.of(0, 1))
    return ClassicalParityCode(3, 2, (frozenset({0, 1, 2}),), labels)


@pytest.fixture
def lhz3():
    return lhz_layout(3)


@pytest.fixture
def rep3():
    return repetition_code(3)


@pytest.fixture
def code_file(tmp_path):
    """Write a code (or any JSON document) to a file and return the path."""
    def write(doc, name='code.json'):
        if isinstance(doc, ClassicalParityCode):
            doc = doc.to_dict()
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


def report_from_output(output: str):
    """The JSON block of a CLI run; log lines around it are skipped."""
    lines = output.splitlines()
    start = lines.index('{')
    end = len(lines) - 1 - lines[::-1].index('}')
    return json.loads('\n'.join(lines[start:end + 1]))
