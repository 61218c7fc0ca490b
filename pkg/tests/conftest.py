import numpy as np
import pytest

from jensenlab.fields import TestFunctionSpec, sample

# The standard 1-D corpus: two smooth members, one Lipschitz, one jump, two
# power cusps straddling the square-integrable-gradient boundary.
CORPUS_SPECS = (
    TestFunctionSpec("gaussian"),
    TestFunctionSpec("tent"),
    TestFunctionSpec("step-indicator"),
    TestFunctionSpec("cusp", alpha=0.25),
    TestFunctionSpec("cusp", alpha=0.75),
)

BOX = (-8.0, 8.0)


def corpus(spacing: float, padding: float = 1.0):
    return [(spec, sample(spec, 1, BOX, spacing, padding=padding))
            for spec in CORPUS_SPECS]


@pytest.fixture(scope="session")
def corpus_1024():
    return corpus(1.0 / 1024.0)


@pytest.fixture(scope="session")
def corpus_256():
    return corpus(1.0 / 256.0)
