import math

import numpy as np
import pytest

from sqzint import (ExperimentConfig, Interferometer, OutputPattern, SchmidtSpectrum,
                    SqueezedSource, ValidationError, hafnian, hafnian_info,
                    ideal_probability, iter_patterns, matching_count, vacuum_probability)
from sqzint.measure import ideal_photon_number_distribution

from conftest import haar_unitary, ryser_permanent, two_source_config


def random_symmetric(rng, dim):
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return raw + raw.T


class TestHafnian:
    def test_two_by_two(self, rng):
        A = random_symmetric(rng, 2)
        assert hafnian(A) == pytest.approx(A[0, 1])

    def test_all_ones(self):
        assert hafnian(np.ones((4, 4))) == pytest.approx(3.0)
        for n in (1, 2, 3, 4):
            assert hafnian(np.ones((2 * n, 2 * n))) == pytest.approx(matching_count(n))

    def test_four_by_four_expansion(self, rng):
        A = random_symmetric(rng, 4)
        expected = A[0, 1] * A[2, 3] + A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2]
        assert hafnian(A) == pytest.approx(expected)

    def test_empty_matrix(self):
        assert hafnian(np.zeros((0, 0))) == 1.0

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValidationError):
            hafnian(np.ones((3, 3)))

    def test_asymmetry_rejected(self, rng):
        A = random_symmetric(rng, 4)
        A[0, 1] += 1e-3
        with pytest.raises(ValidationError):
            hafnian(A)

    def test_diagonal_never_read(self, rng):
        A = random_symmetric(rng, 6)
        B = A.copy()
        np.fill_diagonal(B, 1e6)
        assert hafnian(A) == hafnian(B)

    def test_real_symmetric_gives_real(self, rng):
        A = np.real(random_symmetric(rng, 8))
        value = hafnian(A)
        assert abs(value.imag) <= 1e-12 * max(abs(value), 1.0)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_block_antidiagonal_equals_permanent(self, rng, n):
        B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        block = np.block([[np.zeros((n, n)), B], [B.T, np.zeros((n, n))]])
        assert hafnian(block) == pytest.approx(ryser_permanent(B), rel=1e-10)

    def test_threaded_result_bit_identical(self, rng):
        A = random_symmetric(rng, 8)
        serial = hafnian(A, threads=1)
        for threads in (2, 3, 5):
            assert hafnian(A, threads=threads) == serial

    def test_info_counts_terms(self, rng):
        info = hafnian_info(random_symmetric(rng, 6))
        assert info.n_terms == 15


class TestIdealProbability:
    def test_vacuum_pattern(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum.single_mode())
        assert ideal_probability(cfg, OutputPattern((0, 0))) == vacuum_probability(cfg)

    def test_odd_pattern_zero(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum.single_mode())
        assert ideal_probability(cfg, OutputPattern((2, 1))) == 0.0

    def test_single_source_pair_probability(self):
        # one single-mode source through the identity, two photons out
        r = 0.45
        cfg = ExperimentConfig(Interferometer.identity(2),
                               (SqueezedSource(r, SchmidtSpectrum.single_mode(), 0),))
        value = ideal_probability(cfg, OutputPattern((2, 0)))
        assert value == pytest.approx(math.sqrt(1 - r * r) * r * r / 2, rel=1e-13)

    def test_beamsplitter_conditionals_single_mode(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum.single_mode())
        probs = {m: ideal_probability(cfg, OutputPattern(m))
                 for m in [(4, 0), (0, 4), (2, 2), (3, 1), (1, 3)]}
        assert probs[(3, 1)] == pytest.approx(0.0, abs=1e-18)
        total = probs[(4, 0)] + probs[(0, 4)] + probs[(2, 2)]
        assert probs[(4, 0)] / total == pytest.approx(3 / 8, rel=1e-12)
        assert probs[(2, 2)] / total == pytest.approx(1 / 4, rel=1e-12)

    def test_sector_mass_matches_source_distribution(self, rng):
        # single-mode spectra: the hafnian route must reproduce the source-only
        # pair distribution at every photon number, for any interferometer
        U = Interferometer(haar_unitary(3, rng))
        cfg = ExperimentConfig(U, (
            SqueezedSource(0.4, SchmidtSpectrum.single_mode(), 0),
            SqueezedSource(0.3, SchmidtSpectrum.single_mode(), 1)))
        for n in (0, 1, 2, 3):
            sector = sum(ideal_probability(cfg, p) for p in iter_patterns(3, 2 * n))
            assert sector == pytest.approx(
                ideal_photon_number_distribution(cfg.sources, n), rel=1e-10)

    def test_output_relabeling_invariance(self, rng):
        U = haar_unitary(3, rng)
        perm = [2, 0, 1]
        P = np.eye(3)[perm]
        cfg = ExperimentConfig(Interferometer(U), (
            SqueezedSource(0.4, SchmidtSpectrum.single_mode(), 0),
            SqueezedSource(0.3, SchmidtSpectrum.single_mode(), 1)))
        cfg_p = ExperimentConfig(Interferometer(U @ P.T), cfg.sources)
        for counts in [(2, 0, 0), (1, 1, 0), (2, 1, 1), (0, 2, 2)]:
            permuted = tuple(counts[perm[i]] for i in range(3))
            assert ideal_probability(cfg, OutputPattern(counts)) == pytest.approx(
                ideal_probability(cfg_p, OutputPattern(permuted)), rel=1e-12)
