import json
from pathlib import Path

import numpy as np
import pytest

from cesaro_lab.families import AbsSineRule, CallableFamily, ConstantRule, PowerRule, RuleFamily, SequenceWindow
from cesaro_lab.models import AtomicSpace, AtomTag

REGRESSION_DIR = Path(__file__).resolve().parent.parent / "regression"


@pytest.fixture
def three_atom_space():
    return AtomicSpace(masses=(0.5, 0.3, 0.2))


@pytest.fixture
def three_atom_family():
    """atom 1 constant 1, atom 2 = 2|sin n|, atom 3 = n."""
    return RuleFamily({
        1: ConstantRule(1.0),
        2: AbsSineRule(2.0),
        3: PowerRule(alpha=1.0, scale=1.0),
    })


@pytest.fixture
def three_atom_window(three_atom_family, three_atom_space):
    return SequenceWindow.first(three_atom_family, three_atom_space, 4096)


@pytest.fixture
def linear_family():
    """c[n, m] = n on every atom, declared unbounded."""
    return CallableFamily(lambda n, m: float(n), tags={m: AtomTag.unbounded() for m in range(1, 21)})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict as JSON under tmp_path and return its path."""

    def write(data, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def partition_config():
    return {
        "name": "small-atomic",
        "kind": "partition",
        "seed": 5,
        "space": {"masses": [0.5, 0.3, 0.2]},
        "family": {
            "kind": "rules",
            "rules": {
                "1": {"kind": "constant", "value": 1.0},
                "2": {"kind": "abs_sine", "amplitude": 2.0},
                "3": {"kind": "power", "alpha": 1.0},
            },
        },
        "window": {"horizon": 4096},
        "tolerances": {"tol": 0.005},
        "oracle": {"samples": 100},
    }
