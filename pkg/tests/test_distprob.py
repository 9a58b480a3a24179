import itertools
import math

import numpy as np
import pytest

from sqzint import (ExperimentConfig, Interferometer, Matching, OutputPattern,
                    ResourceLimitError, SchmidtSpectrum, SimulationOptions,
                    SqueezedSource, ValidationError, a_matrix,
                    beamsplitter_conditionals, four_photon_probability, ideal_probability,
                    iter_patterns, j_function, probability, probability_general,
                    probability_identical, probability_orthogonal, q2n,
                    symmetry_decomposition, vacuum_probability)
from sqzint.distprob import DistinguishabilityWeights, probability_route
from sqzint.measure import photon_number_distribution

from conftest import haar_unitary, random_spectrum, two_source_config


class TestJFunction:
    def test_trivial_matching(self):
        spec = SchmidtSpectrum((0.6, 0.4))
        assert j_function(Matching.trivial(3), spec) == 1.0

    def test_single_mode_always_one(self):
        spec = SchmidtSpectrum.single_mode()
        for m in [Matching((1, 3, 2, 4)), Matching((1, 4, 2, 3))]:
            assert j_function(m, spec) == pytest.approx(1.0)

    def test_two_cycle_weight(self):
        spec = SchmidtSpectrum((0.5, 0.5))
        assert j_function(Matching((1, 3, 2, 4)), spec) == pytest.approx(0.5)

    def test_refinement_lowers_weight(self):
        m = Matching((1, 3, 2, 4))
        coarse = SchmidtSpectrum((0.5, 0.5))
        fine = SchmidtSpectrum((0.5, 0.25, 0.25))
        assert j_function(m, fine) < j_function(m, coarse)

    def test_weights_validation(self):
        with pytest.raises(ValidationError):
            DistinguishabilityWeights((0.5, 0.9))  # moments must not increase


class TestProbabilityIdentical:
    def test_single_mode_reduces_to_hafnian(self, rng):
        U = Interferometer(haar_unitary(3, rng))
        cfg = ExperimentConfig(U, (
            SqueezedSource(0.4, SchmidtSpectrum.single_mode(), 0),
            SqueezedSource(0.3, SchmidtSpectrum.single_mode(), 1)))
        for counts in [(2, 0, 0), (1, 1, 0), (2, 2, 0), (2, 1, 1), (4, 0, 0)]:
            p = OutputPattern(counts)
            assert probability_identical(cfg, p) == pytest.approx(
                ideal_probability(cfg, p), rel=1e-12, abs=1e-18)

    def test_odd_pattern_zero(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)))
        assert probability_identical(cfg, OutputPattern((2, 1))) == 0.0

    def test_vacuum(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)))
        assert probability_identical(cfg, OutputPattern((0, 0))) == vacuum_probability(cfg)

    def test_matches_four_photon_closed_form(self, rng):
        for ports in ((2, 3), (0, 2)):
            U = Interferometer(haar_unitary(4, rng))
            spec = random_spectrum(rng, 3)
            cfg = two_source_config(U, spec, r1=rng.uniform(0.2, 0.6),
                                    r2=rng.uniform(0.2, 0.6), ports=ports)
            p0 = vacuum_probability(cfg)
            for counts in [(4, 0, 0, 0), (2, 2, 0, 0), (1, 1, 1, 1), (2, 1, 1, 0)]:
                pattern = OutputPattern(counts)
                closed = four_photon_probability(a_matrix(cfg, pattern), spec.purity,
                                                 p0, pattern)
                assert probability_identical(cfg, pattern) == pytest.approx(
                    closed, rel=1e-12, abs=1e-18)

    def test_beamsplitter_three_one_closed_form(self, balanced_bs, rng):
        # p_(3,1) = (p0/2) A11^2 A12^2 (1 + 2P) for two degenerate sources
        spec = random_spectrum(rng, 2)
        cfg = two_source_config(balanced_bs, spec, r1=0.5, r2=0.3)
        pattern = OutputPattern((3, 1))
        A = a_matrix(cfg, pattern)
        p0 = vacuum_probability(cfg)
        expected = (p0 / 2) * abs(A[0, 0]) ** 2 * abs(A[0, 3]) ** 2 * (1 + 2 * spec.purity)
        assert probability_identical(cfg, pattern) == pytest.approx(expected, rel=1e-12)

    def test_conditionals_at_reported_purity(self, balanced_bs):
        eps = 0.032
        spec = SchmidtSpectrum.two_mode(eps)
        P = spec.purity
        cfg = two_source_config(balanced_bs, spec)
        probs = {m: probability_identical(cfg, OutputPattern(m))
                 for m in [(4, 0), (0, 4), (2, 2)]}
        total = sum(probs.values())
        assert probs[(4, 0)] / total == pytest.approx((1 + 2 * P) / (4 + 4 * P), rel=1e-12)
        assert probs[(2, 2)] / total == pytest.approx(1 / (2 + 2 * P), rel=1e-12)

    def test_mixed_spectra_rejected(self, balanced_bs):
        cfg = ExperimentConfig(balanced_bs, (
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (0, 1)), 0),
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (2, 3)), 1)))
        with pytest.raises(ValidationError, match="probability_general"):
            probability_identical(cfg, OutputPattern((1, 1)))

    def test_photon_cutoff_guard(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)),
                                photon_cutoff=4)
        with pytest.raises(ResourceLimitError):
            probability_identical(cfg, OutputPattern((4, 2)))

    def test_threaded_bit_identical(self, rng):
        U = Interferometer(haar_unitary(2, rng))
        cfg = two_source_config(U, SchmidtSpectrum((0.6, 0.4)), r1=0.5, r2=0.4)
        pattern = OutputPattern((3, 3))
        serial = probability_identical(cfg, pattern, threads=1)
        assert probability_identical(cfg, pattern, threads=4) == serial

    def test_basis_relabeling_invariance(self, rng):
        U = Interferometer(haar_unitary(2, rng))
        spec = SchmidtSpectrum((0.6, 0.3, 0.1), (0, 1, 2))
        relabeled = spec.relabel({0: 7, 1: 11, 2: 4})
        cfg = two_source_config(U, spec, r1=0.4, r2=0.5)
        cfg2 = two_source_config(U, relabeled, r1=0.4, r2=0.5)
        for counts in [(2, 0), (1, 1), (2, 2), (4, 0)]:
            assert probability_identical(cfg, OutputPattern(counts)) == \
                probability_identical(cfg2, OutputPattern(counts))

    def test_sector_mass_interferometer_independent(self, rng):
        spec = SchmidtSpectrum((0.6, 0.4))
        sources = lambda: (SqueezedSource(0.45, spec, 0), SqueezedSource(0.35, spec, 1))
        cfg_a = ExperimentConfig(Interferometer(haar_unitary(3, rng)), sources())
        cfg_b = ExperimentConfig(Interferometer(haar_unitary(3, rng)), sources())
        for n in (1, 2, 3):
            mass_a = sum(probability_identical(cfg_a, p) for p in iter_patterns(3, 2 * n))
            mass_b = sum(probability_identical(cfg_b, p) for p in iter_patterns(3, 2 * n))
            assert mass_a == pytest.approx(mass_b, abs=1e-10)
            assert mass_a == pytest.approx(
                photon_number_distribution(cfg_a.sources, n), rel=1e-10)

    def test_probabilities_bounded(self, rng, balanced_bs):
        spec = random_spectrum(rng, 3)
        cfg = two_source_config(balanced_bs, spec, r1=0.5, r2=0.4)
        total = 0.0
        for photons in (0, 2, 4, 6):
            for p in iter_patterns(2, photons):
                value = probability_identical(cfg, p)
                assert value >= 0.0
                total += value
        assert total <= 1.0 + 1e-12


class TestFourPhotonClosedForm:
    def test_wrong_photon_number_rejected(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum.single_mode())
        A = a_matrix(cfg, OutputPattern((1, 1)))
        with pytest.raises(ValidationError):
            four_photon_probability(np.eye(4), 1.0, 0.9, OutputPattern((1, 1)))
        with pytest.raises(ValidationError):
            four_photon_probability(A, 1.0, 0.9, OutputPattern((2, 2)))

    def test_conditional_helpers(self):
        p40, p04, p22 = beamsplitter_conditionals(1.0)
        assert (p40, p04, p22) == pytest.approx((3 / 8, 3 / 8, 1 / 4))
        p40, p04, p22 = beamsplitter_conditionals(0.938)
        assert p40 == pytest.approx((1 + 2 * 0.938) / (4 + 4 * 0.938))
        assert p40 == pytest.approx(0.3710010, abs=5e-7)
        assert p22 == pytest.approx(0.2579979, abs=5e-7)
        assert p40 + p04 + p22 == pytest.approx(1.0)


class TestProbabilityOrthogonal:
    def test_single_source_reduces_to_identical(self, rng):
        U = Interferometer(haar_unitary(2, rng))
        spec = random_spectrum(rng, 2)
        cfg = ExperimentConfig(U, (SqueezedSource(0.5, spec, 0),))
        for counts in [(2, 0), (1, 1), (2, 2)]:
            p = OutputPattern(counts)
            assert probability_orthogonal(cfg, p) == pytest.approx(
                probability_identical(cfg, p), rel=1e-13)

    def test_two_photon_split_terms(self, balanced_bs):
        # orthogonal single-mode sources: p_(1,1) adds the two even splits
        cfg = ExperimentConfig(balanced_bs, (
            SqueezedSource(0.4, SchmidtSpectrum.single_mode(0), 0),
            SqueezedSource(0.3, SchmidtSpectrum.single_mode(1), 1)))
        sub0 = ExperimentConfig(balanced_bs, (cfg.sources[0],))
        sub1 = ExperimentConfig(balanced_bs, (cfg.sources[1],))
        pattern = OutputPattern((1, 1))
        expected = (probability_identical(sub0, pattern) * vacuum_probability(sub1)
                    + vacuum_probability(sub0) * probability_identical(sub1, pattern))
        assert probability_orthogonal(cfg, pattern) == pytest.approx(expected, rel=1e-13)

    def test_overlapping_labels_rejected(self, balanced_bs):
        spec = SchmidtSpectrum((0.7, 0.3), (0, 1))
        cfg = two_source_config(balanced_bs, spec)
        with pytest.raises(ValidationError):
            probability_orthogonal(cfg, OutputPattern((1, 1)))

    def test_matches_general_route(self, rng):
        U = Interferometer(haar_unitary(2, rng))
        cfg = ExperimentConfig(U, (
            SqueezedSource(0.45, SchmidtSpectrum((0.6, 0.4), (0, 1)), 0),
            SqueezedSource(0.35, SchmidtSpectrum((0.8, 0.2), (2, 3)), 1)))
        for photons in (0, 2, 4):
            for p in iter_patterns(2, photons):
                assert probability_orthogonal(cfg, p) == pytest.approx(
                    probability_general(cfg, p), rel=1e-10, abs=1e-15)


class TestProbabilityGeneral:
    def test_identical_spectra_consistency(self, rng):
        U = Interferometer(haar_unitary(2, rng))
        spec = random_spectrum(rng, 2)
        cfg = two_source_config(U, spec, r1=0.4, r2=0.5)
        for photons in (2, 4):
            for p in iter_patterns(2, photons):
                assert probability_general(cfg, p) == pytest.approx(
                    probability_identical(cfg, p), rel=1e-10, abs=1e-15)

    def test_bruteforce_guard(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)),
                                bruteforce_limit=4)
        with pytest.raises(ResourceLimitError):
            probability_general(cfg, OutputPattern((4, 2)))

    def test_route_dispatch(self, balanced_bs):
        shared = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)))
        assert probability_route(shared) == "identical"
        disjoint = ExperimentConfig(balanced_bs, (
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (0, 1)), 0),
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (2, 3)), 1)))
        assert probability_route(disjoint) == "orthogonal"
        partial = ExperimentConfig(balanced_bs, (
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (0, 1)), 0),
            SqueezedSource(0.3, SchmidtSpectrum((0.7, 0.3), (1, 2)), 1)))
        assert probability_route(partial) == "general"
        pattern = OutputPattern((1, 1))
        for cfg in (shared, disjoint, partial):
            assert probability(cfg, pattern) >= 0.0


class TestSymmetryDecomposition:
    def test_reconstruction_and_nonnegativity(self, balanced_bs):
        spec = SchmidtSpectrum((0.75, 0.25))
        cfg = two_source_config(balanced_bs, spec, r1=0.35, r2=0.35)
        dec = symmetry_decomposition(cfg, max_photons=6)
        assert dec.residual_min >= -1e-10
        for row in dec.rows:
            assert row.probability == pytest.approx(
                row.q * row.symmetric_part + row.residual, abs=1e-15)
        # sectors with zero or one pair carry no residual: one pair state is
        # always symmetric
        for row in dec.rows:
            if sum(row.counts) <= 2:
                assert row.residual == pytest.approx(0.0, abs=1e-15)

    def test_perp_distribution_normalized(self, balanced_bs):
        spec = SchmidtSpectrum((0.75, 0.25))
        cfg = two_source_config(balanced_bs, spec, r1=0.35, r2=0.35)
        dec = symmetry_decomposition(cfg, max_photons=6)
        perp = dec.perp_distribution()
        assert perp  # multimode spectrum leaves a distinguishable share
        assert sum(perp.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(v >= -1e-10 for v in perp.values())

    def test_single_source_has_no_residual(self, rng):
        # with one source the symmetric part exhausts the distribution
        U = Interferometer(haar_unitary(2, rng))
        cfg = ExperimentConfig(U, (SqueezedSource(0.4, SchmidtSpectrum((0.6, 0.4)), 0),))
        dec = symmetry_decomposition(cfg, max_photons=6)
        for row in dec.rows:
            assert row.residual == pytest.approx(0.0, abs=1e-15)
