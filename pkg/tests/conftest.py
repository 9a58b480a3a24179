import math

import numpy as np
import pytest

from sqzint import ExperimentConfig, Interferometer, SchmidtSpectrum, SqueezedSource


def haar_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases.conj()


def random_spectrum(rng, modes, first_basis_index=0):
    raw = rng.uniform(0.05, 1.0, size=modes)
    weights = raw / raw.sum()
    # fsum-exact normalization so validation at 1e-12 never trips
    weights[-1] = 1.0 - math.fsum(weights[:-1])
    return SchmidtSpectrum(tuple(weights), tuple(range(first_basis_index,
                                                       first_basis_index + modes)))


def ryser_permanent(mat):
    """Independent permanent for the hafnian block test (inclusion-exclusion)."""
    mat = np.asarray(mat, dtype=complex)
    n = mat.shape[0]
    total = 0j
    for subset in range(1, 1 << n):
        k = bin(subset).count("1")
        sign = -1 if (n - k) % 2 else 1
        cols = [j for j in range(n) if subset >> j & 1]
        rowsums = mat[:, cols].sum(axis=1)
        total += sign * np.prod(rowsums)
    return total


def two_source_config(interferometer, spectrum, r1=0.3, r2=0.3, ports=(0, 1), **opts):
    from sqzint import SimulationOptions
    return ExperimentConfig(
        interferometer,
        (SqueezedSource(r=r1, spectrum=spectrum, port=ports[0]),
         SqueezedSource(r=r2, spectrum=spectrum, port=ports[1])),
        SimulationOptions(**opts) if opts else SimulationOptions())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def balanced_bs():
    return Interferometer.beamsplitter()
