import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np  # noqa: E402
import pytest  # noqa: E402
from click.testing import CliRunner  # noqa: E402

from cmsdisc.measures import DiscreteMeasure, save_measure, test_corpus  # noqa: E402


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="session")
def corpus():
    return test_corpus(0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def delta_file(tmp_path):
    """Measure file holding the point mass at 0."""
    return save_measure(DiscreteMeasure.point_mass(0.0), tmp_path / "delta0.csv")


@pytest.fixture(scope="session")
def interval_measures():
    """100 random measures with every atom in [-1, 1]."""
    gen = np.random.default_rng(7)
    out = []
    for i in range(100):
        size = int(gen.integers(1, 30))
        out.append(
            DiscreteMeasure.normalized(
                gen.uniform(-1.0, 1.0, size), gen.dirichlet(np.ones(size)), label=f"inside-{i}"
            )
        )
    return out
