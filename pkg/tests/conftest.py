import numpy as np
import pytest

import temquant as tq

OMEGA0 = 2 * np.pi * 50.0


def make_zero_process(support=(-0.15, 0.15), omega0=OMEGA0):
    """All-zero coefficients on the standard lattice (normalization bypassed)."""
    spacing = np.pi / omega0
    first = support[0] - spacing
    n = int(np.floor((support[1] + spacing - first) / spacing + 1e-9)) + 1
    centers = first + spacing * np.arange(n)
    return tq.BandlimitedProcess(np.zeros(n), centers, omega0, 1.0, support)


@pytest.fixture(scope="session")
def paper_params():
    return tq.TemParams(bias_b=1.2, scale_kappa=1.0, threshold_delta=0.0015)


@pytest.fixture(scope="session")
def short_process():
    return tq.generate_realization(3, OMEGA0, (-0.15, 0.15),
                                   "gaussian-coefficients", 1.0)


@pytest.fixture(scope="session")
def short_sequence(short_process, paper_params):
    return tq.encode(short_process, paper_params, grid_step=1e-6)
