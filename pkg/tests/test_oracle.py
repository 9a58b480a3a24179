import math

import numpy as np
import pytest

from sqzint import (ExperimentConfig, Interferometer, OutputPattern, ResourceLimitError,
                    SchmidtSpectrum, SqueezedSource, ValidationError,
                    apply_interferometer, build_input_state, detection_probability,
                    iter_patterns, oracle_probability, probability, regression_corpus,
                    run_regression, vacuum_probability)
from sqzint.measure import photon_number_distribution
from sqzint.oracle import _fock_amplitude

from conftest import haar_unitary, random_spectrum, two_source_config


def single_source_config(r, spectrum, dim=1, port=0):
    return ExperimentConfig(Interferometer.identity(dim),
                            (SqueezedSource(r, spectrum, port),))


class TestBuildInputState:
    def test_single_mode_amplitudes(self):
        # 2n photons in one mode carry amplitude Z sqrt((2n)!)/(2^n n!) r^n
        r = 0.5
        state = build_input_state(single_source_config(r, SchmidtSpectrum.single_mode()),
                                  pair_cutoff=3)
        z = (1 - r * r) ** 0.25
        for pairs in range(4):
            key = () if pairs == 0 else ((((0, 0), 2 * pairs)),)
            amp = _fock_amplitude(key, state.amplitudes[key])
            expected = z * math.sqrt(math.factorial(2 * pairs)) / (
                2 ** pairs * math.factorial(pairs)) * r ** pairs
            assert amp == pytest.approx(expected, rel=1e-13)

    def test_small_r_is_vacuum(self):
        state = build_input_state(single_source_config(1e-9, SchmidtSpectrum.single_mode()),
                                  pair_cutoff=2)
        assert abs(state.amplitudes[()]) == pytest.approx(1.0, abs=1e-12)
        assert state.truncation_tail < 1e-12

    def test_two_mode_first_order_weights(self):
        # one pair split over a two-mode spectrum: amplitudes weigh as sqrt(p_j)
        spec = SchmidtSpectrum((0.7, 0.3))
        r = 0.4
        state = build_input_state(single_source_config(r, spec), pair_cutoff=2)
        amp0 = _fock_amplitude((((0, 0), 2),), state.amplitudes[(((0, 0), 2),)])
        amp1 = _fock_amplitude((((0, 1), 2),), state.amplitudes[(((0, 1), 2),)])
        assert amp0 / amp1 == pytest.approx(math.sqrt(0.7 / 0.3), rel=1e-13)

    def test_truncation_tail_reported(self):
        state = build_input_state(single_source_config(0.8, SchmidtSpectrum.single_mode()),
                                  pair_cutoff=2)
        exact_kept = sum(
            math.sqrt(1 - 0.64) * math.comb(2 * a, a) * (0.8 / 2) ** (2 * a)
            for a in range(3))
        assert state.truncation_tail == pytest.approx(1 - exact_kept, rel=1e-10)

    def test_cutoff_guard(self):
        with pytest.raises(ResourceLimitError):
            build_input_state(single_source_config(0.4, SchmidtSpectrum.single_mode()),
                              pair_cutoff=9)


class TestApplyInterferometer:
    def test_identity_leaves_state(self):
        cfg = single_source_config(0.5, SchmidtSpectrum((0.6, 0.4)), dim=2)
        state = build_input_state(cfg, pair_cutoff=2)
        after = apply_interferometer(state, Interferometer.identity(2))
        assert set(after.amplitudes) == set(state.amplitudes)
        for key, amp in state.amplitudes.items():
            assert after.amplitudes[key] == pytest.approx(amp, rel=1e-13)

    def test_norm_preserved(self, rng):
        cfg = two_source_config(Interferometer(haar_unitary(3, rng)),
                                random_spectrum(rng, 2), r1=0.5, r2=0.4,
                                ports=(0, 2))
        state = build_input_state(cfg, pair_cutoff=3)
        before = state.norm_squared()
        after = apply_interferometer(state, cfg.interferometer)
        assert after.norm_squared() == pytest.approx(before, rel=1e-12)

    def test_photon_numbers_preserved(self, rng):
        cfg = single_source_config(0.5, SchmidtSpectrum((0.7, 0.3)), dim=2)
        state = build_input_state(cfg, pair_cutoff=2)
        after = apply_interferometer(state, Interferometer.beamsplitter())
        assert after.photon_numbers() == pytest.approx(state.photon_numbers())


class TestDetection:
    def test_vacuum_detection_is_vacuum_probability(self, rng, balanced_bs):
        spec = random_spectrum(rng, 2)
        cfg = two_source_config(balanced_bs, spec, r1=0.5, r2=0.3)
        result = oracle_probability(cfg, OutputPattern((0, 0)))
        assert result.value == pytest.approx(vacuum_probability(cfg), rel=1e-12)

    def test_odd_pattern_zero(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum((0.7, 0.3)))
        assert oracle_probability(cfg, OutputPattern((2, 1))).value == 0.0

    def test_pattern_beyond_cutoff_rejected(self, balanced_bs):
        cfg = two_source_config(balanced_bs, SchmidtSpectrum.single_mode())
        state = build_input_state(cfg, pair_cutoff=1)
        with pytest.raises(ValidationError):
            detection_probability(state, OutputPattern((4, 0)))

    def test_beamsplitter_conditionals(self, balanced_bs):
        # the four-photon bunching ratios, straight out of the oracle
        eps = 0.05
        spec = SchmidtSpectrum.two_mode(eps)
        P = spec.purity
        cfg = two_source_config(balanced_bs, spec)
        probs = {m: oracle_probability(cfg, OutputPattern(m)).value
                 for m in [(4, 0), (0, 4), (2, 2), (3, 1), (1, 3)]}
        assert probs[(3, 1)] == pytest.approx(0.0, abs=1e-16)
        total = probs[(4, 0)] + probs[(0, 4)] + probs[(2, 2)]
        assert probs[(4, 0)] / total == pytest.approx((1 + 2 * P) / (4 + 4 * P), rel=1e-10)
        assert probs[(2, 2)] / total == pytest.approx(1 / (2 + 2 * P), rel=1e-10)

    def test_sector_masses_match_source_distribution(self, rng):
        spec = random_spectrum(rng, 2)
        cfg = two_source_config(Interferometer(haar_unitary(2, rng)), spec,
                                r1=0.45, r2=0.3)
        state = build_input_state(cfg, pair_cutoff=3)
        state = apply_interferometer(state, cfg.interferometer)
        for n in (0, 1, 2, 3):
            mass = sum(detection_probability(state, p) for p in iter_patterns(2, 2 * n))
            assert mass == pytest.approx(photon_number_distribution(cfg.sources, n),
                                         abs=1e-9)


class TestRegression:
    def test_corpus_size_and_coverage(self):
        cases = regression_corpus()
        assert len(cases) >= 20
        assert any(c.max_photons == 6 for c in cases)
        assert any(s.kind == "non-degenerate" for c in cases for s in c.config.sources)

    def test_formulas_match_oracle(self):
        rows = run_regression(regression_corpus()[:6])
        assert rows
        for row in rows:
            assert row.difference <= 1e-9
