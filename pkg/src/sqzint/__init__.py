"""Photon-counting statistics of multimode squeezed light on linear interferometers.

The package computes exact output probability distributions for squeezed
vacuum states whose Schmidt-mode structure makes the photons partially
distinguishable, the indistinguishability measure q_2n with its
total-variation bound, and experiment-scale estimates, all cross-validated
by an independent truncated Fock-space oracle.
"""
from .errors import ResourceLimitError, SqzintError, ToleranceError, ValidationError
from .matchings import (CycleType, Matching, OrderedMatching, count_by_cycle_type,
                        cycle_index_matchings, cycle_index_symmetric, double_factorial,
                        double_set_cycle_type, enumerate_matchings,
                        enumerate_ordered_matchings, matching_count, mu_matching_count,
                        ordered_matching_count, project_permutation, relative_cycle_type)
from .model import (ExperimentConfig, Interferometer, OutputPattern, SchmidtSpectrum,
                    SimulationOptions, SqueezedSource, a_matrix, config_from_json,
                    config_to_json, iter_patterns, load_config, reduced_matrix,
                    validate_unitary, vacuum_probability)
from .hafnian import HafnianResult, hafnian, hafnian_info, ideal_probability
from .distprob import (DistinguishabilityWeights, SymmetryDecomposition,
                       beamsplitter_conditionals, four_photon_probability, j_function,
                       probability, probability_general, probability_identical,
                       probability_orthogonal, symmetry_decomposition)
from .measure import (IndistinguishabilityReport, QbarBound, TwoModeNoiseEstimate,
                      build_report, equal_r_pair_distribution,
                      ideal_photon_number_distribution, mean_pairs_and_dispersion,
                      noise_amplitude_from_purity, photon_number_distribution, q2n,
                      q2n_floor, q2n_general, q4_closed_form, qbar_and_tvd_bound,
                      two_mode_noise_estimate)
from .oracle import (FockState, OracleProbability, apply_interferometer,
                     build_input_state, detection_probability, oracle_probability,
                     regression_corpus, run_regression)

__version__ = "0.1.0"

__all__ = [
    "CycleType", "DistinguishabilityWeights", "ExperimentConfig", "FockState",
    "HafnianResult", "IndistinguishabilityReport", "Interferometer", "Matching",
    "OracleProbability", "OrderedMatching", "OutputPattern", "QbarBound",
    "ResourceLimitError", "SchmidtSpectrum", "SimulationOptions", "SqueezedSource",
    "SqzintError", "SymmetryDecomposition", "ToleranceError", "TwoModeNoiseEstimate",
    "ValidationError", "a_matrix", "apply_interferometer", "beamsplitter_conditionals",
    "build_input_state", "build_report", "config_from_json", "config_to_json",
    "count_by_cycle_type", "cycle_index_matchings", "cycle_index_symmetric",
    "detection_probability", "double_factorial", "double_set_cycle_type",
    "enumerate_matchings", "enumerate_ordered_matchings", "equal_r_pair_distribution",
    "four_photon_probability", "hafnian", "hafnian_info",
    "ideal_photon_number_distribution", "ideal_probability", "iter_patterns",
    "j_function", "load_config", "matching_count", "mean_pairs_and_dispersion",
    "mu_matching_count", "noise_amplitude_from_purity", "oracle_probability",
    "ordered_matching_count", "photon_number_distribution", "probability",
    "probability_general", "probability_identical", "probability_orthogonal",
    "project_permutation", "q2n", "q2n_floor", "q2n_general", "q4_closed_form",
    "qbar_and_tvd_bound", "reduced_matrix", "regression_corpus", "relative_cycle_type",
    "run_regression", "symmetry_decomposition", "two_mode_noise_estimate",
    "validate_unitary", "vacuum_probability",
]
