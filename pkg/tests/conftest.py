import copy
import json

import pytest

from scaled_mcf.config import parse_config

ENERGY_RUN = {
    "surface": {"kind": "unit_circle"},
    "grid": {"n": 128},
    "density": {"kind": "exponential"},
    "initial": {"u0": {"offset": 1.0, "modes": [[1, 0.2, -1.5707963267948966]]}},
    "integrator": {"scheme": "rk4", "dt": 1e-4, "T": 0.05},
    "output": {"snapshot_interval": 1e-3},
}


def merge(base: dict, **sections) -> dict:
    doc = copy.deepcopy(base)
    for name, values in sections.items():
        doc.setdefault(name, {}).update(values)
    return doc


def make_config(base: dict = ENERGY_RUN, **sections):
    return parse_config(json.dumps(merge(base, **sections)))


@pytest.fixture
def energy_doc():
    return copy.deepcopy(ENERGY_RUN)


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
