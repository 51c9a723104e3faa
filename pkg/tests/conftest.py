import numpy as np
import pytest

from bsiac import BayesSiacModel, build_filter_matrix, build_kernel, build_mesh, identity_operator, make_dataset
from bsiac.datasets import denoising_signal

ACCEPTANCE_LINES = []


def record(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def observed_rates(cells, errors):
    cells, errors = np.asarray(cells, float), np.asarray(errors, float)
    return np.log(errors[:-1] / errors[1:]) / np.log(cells[1:] / cells[:-1])


def random_small_model(rng, n=None, m=None, identity=False):
    """Small dense model with a genuine SIAC prior on a periodic mesh."""
    from bsiac.operators import DenseOperator
    k = int(rng.integers(0, 3))
    cells = int(rng.integers(3 * k + 3, 3 * k + 9))  # kernel must fit in half the domain
    mesh = build_mesh(0.0, 1.0, cells, k, "gauss-legendre")
    F = build_filter_matrix(mesh, build_kernel(2 * k, k + 1))
    N = mesh.size
    if identity:
        A = identity_operator(N)
        M = N
    else:
        # F - I has near-null smooth modes, so keep A injective
        M = int(rng.integers(N, 2 * N)) if m is None else m
        A = DenseOperator(rng.standard_normal((M, N)) / np.sqrt(N))
    b = rng.standard_normal(M)
    return BayesSiacModel(A, b, F)


@pytest.fixture(scope="session")
def denoise_setup():
    mesh = build_mesh(0.0, 1.0, 25, 3, "equidistant")
    F = build_filter_matrix(mesh, build_kernel(6, 4))
    truth = denoising_signal(mesh.nodes)
    A = identity_operator(mesh.size)
    return mesh, F, truth, A


def denoise_model(setup, seed):
    mesh, F, truth, A = setup
    ds = make_dataset(A, truth, 5e-2, seed)
    return BayesSiacModel(A, ds.data, F), ds
