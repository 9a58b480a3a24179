"""Brute-force Fock-space validator.

Expands the squeezed input states as truncated polynomials in creation
operators over (port, internal-mode) keys, pushes the interferometer through
by substituting each input operator with its output expansion, and reads
probabilities off squared occupation amplitudes.  No matchings, hafnians or
permutation sums appear anywhere in this path; that independence is the
point.

Because photon number is conserved, truncating the input at ``pair_cutoff``
pairs leaves every detection probability with at most 2 * pair_cutoff
photons exact; the truncation tail only shows up in norm accounting and is
reported alongside.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .model import (ExperimentConfig, Interferometer, OutputPattern, SchmidtSpectrum,
                    SqueezedSource, iter_patterns)

MAX_PAIR_CUTOFF = 6

# A state is a map from monomial keys to coefficients: the key lists
# ((port, internal_label), power) sorted, the coefficient multiplies
# prod (a_dag)^power |vac>.  The Fock amplitude of the key is
# coeff * sqrt(prod power!).
Key = tuple[tuple[tuple[int, int], int], ...]


@dataclass(frozen=True)
class FockState:
    amplitudes: dict[Key, complex]
    pair_cutoff: int
    truncation_tail: float

    def norm_squared(self) -> float:
        return math.fsum(abs(_fock_amplitude(key, c)) ** 2
                         for key, c in self.amplitudes.items())

    def photon_numbers(self) -> dict[int, float]:
        """Total probability carried by each photon number."""
        out: dict[int, float] = {}
        for key, c in self.amplitudes.items():
            n = sum(power for _, power in key)
            out[n] = out.get(n, 0.0) + abs(_fock_amplitude(key, c)) ** 2
        return out


def _fock_amplitude(key: Key, coeff: complex) -> complex:
    scale = 1.0
    for _, power in key:
        scale *= math.factorial(power)
    return coeff * math.sqrt(scale)


def _poly_multiply(p1: dict[Key, complex], p2: dict[Key, complex],
                   max_photons: int | None = None) -> dict[Key, complex]:
    out: dict[Key, complex] = {}
    for k1, c1 in p1.items():
        n1 = sum(power for _, power in k1)
        for k2, c2 in p2.items():
            if max_photons is not None:
                if n1 + sum(power for _, power in k2) > max_photons:
                    continue
            merged = dict(k1)
            for op, power in k2:
                merged[op] = merged.get(op, 0) + power
            key = tuple(sorted(merged.items()))
            out[key] = out.get(key, 0j) + c1 * c2
    return out


def _degenerate_polynomial(source: SqueezedSource, pair_cutoff: int) -> dict[Key, complex]:
    """exp((r/2) sum_j sqrt(p_j) a_{q,g_j}^dag 2) |vac>, to pair_cutoff pairs."""
    normalization = source.vacuum_factor() ** 0.5
    out: dict[Key, complex] = {}
    modes = list(zip(source.spectrum.basis, source.spectrum.weights))
    for occupation in itertools.product(range(pair_cutoff + 1), repeat=len(modes)):
        if sum(occupation) > pair_cutoff:
            continue
        coeff = complex(normalization)
        key: list[tuple[tuple[int, int], int]] = []
        for (label, weight), pairs in zip(modes, occupation):
            if pairs:
                coeff *= (source.r * math.sqrt(weight) / 2.0) ** pairs / math.factorial(pairs)
                key.append(((source.port, label), 2 * pairs))
        out[tuple(sorted(key))] = coeff
    return out


def _nondegenerate_polynomial(source: SqueezedSource, pair_cutoff: int) -> dict[Key, complex]:
    """exp(r sum_j sqrt(p_j) a_{q1,phi_j}^dag a_{q2,psi_j}^dag) |vac>."""
    normalization = source.vacuum_factor() ** 0.5
    out: dict[Key, complex] = {}
    terms = source.pair_terms()
    q1, q2 = source.pair_ports()
    for occupation in itertools.product(range(pair_cutoff + 1), repeat=len(terms)):
        if sum(occupation) > pair_cutoff:
            continue
        coeff = complex(normalization)
        powers: dict[tuple[int, int], int] = {}
        for (g1, g2, weight), pairs in zip(terms, occupation):
            if pairs:
                coeff *= (source.r * math.sqrt(weight)) ** pairs / math.factorial(pairs)
                powers[(q1, g1)] = powers.get((q1, g1), 0) + pairs
                powers[(q2, g2)] = powers.get((q2, g2), 0) + pairs
        out[tuple(sorted(powers.items()))] = coeff
    return out


def build_input_state(config: ExperimentConfig, pair_cutoff: int | None = None) -> FockState:
    """Product state of all sources in occupation representation.

    Keeps at most ``pair_cutoff`` photon pairs in total and reports the
    discarded norm as the truncation tail.
    """
    if pair_cutoff is None:
        pair_cutoff = config.options.oracle_pair_cutoff
    if pair_cutoff < 0:
        raise ValidationError("pair_cutoff must be >= 0")
    if pair_cutoff > MAX_PAIR_CUTOFF:
        raise ResourceLimitError(
            f"pair_cutoff {pair_cutoff} exceeds the oracle guard {MAX_PAIR_CUTOFF}")
    state: dict[Key, complex] = {(): 1.0 + 0j}
    for source in config.sources:
        if source.kind == "degenerate":
            poly = _degenerate_polynomial(source, pair_cutoff)
        else:
            poly = _nondegenerate_polynomial(source, pair_cutoff)
        state = _poly_multiply(state, poly, max_photons=2 * pair_cutoff)
    amps = {k: c for k, c in state.items() if c != 0}
    tail = 1.0 - math.fsum(abs(_fock_amplitude(k, c)) ** 2 for k, c in amps.items())
    return FockState(amplitudes=amps, pair_cutoff=pair_cutoff,
                     truncation_tail=max(tail, 0.0))


def apply_interferometer(state: FockState, interferometer: Interferometer) -> FockState:
    """Substitute a_{k,g}^dag -> sum_l U[k,l] b_{l,g}^dag and re-expand.

    The internal label rides along untouched; the norm is preserved up to
    rounding on the kept (photon-number-conserving) subspace.
    """
    U = interferometer.matrix
    n_ports = interferometer.dim
    out: dict[Key, complex] = {}
    for key, coeff in state.amplitudes.items():
        expanded: dict[Key, complex] = {(): coeff}
        for (port, label), power in key:
            if port >= n_ports:
                raise ValidationError("state occupies a port outside the interferometer")
            # (sum_l U[k,l] b_l)^power via the multinomial theorem
            term: dict[Key, complex] = {}
            for split in _compositions(power, n_ports):
                amp = complex(math.factorial(power))
                monomial: list[tuple[tuple[int, int], int]] = []
                for out_port, c in enumerate(split):
                    if c:
                        amp *= U[port, out_port] ** c / math.factorial(c)
                        monomial.append(((out_port, label), c))
                if amp != 0:
                    k = tuple(sorted(monomial))
                    term[k] = term.get(k, 0j) + amp
            expanded = _poly_multiply(expanded, term)
        for k, c in expanded.items():
            out[k] = out.get(k, 0j) + c
    return FockState(amplitudes={k: c for k, c in out.items() if c != 0},
                     pair_cutoff=state.pair_cutoff,
                     truncation_tail=state.truncation_tail)


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def detection_probability(state: FockState, pattern: OutputPattern) -> float:
    """Probability of the spatial click pattern, internal modes unresolved.

    Sums squared amplitudes over every internal-mode assignment whose port
    marginal equals the pattern.  Exact for patterns within the cutoff.
    """
    if pattern.total > 2 * state.pair_cutoff:
        raise ValidationError(
            f"pattern needs {pattern.total} photons but the state keeps "
            f"{2 * state.pair_cutoff}")
    target = tuple(pattern.counts)
    n_ports = len(target)
    total = 0.0
    for key, coeff in state.amplitudes.items():
        marginal = [0] * n_ports
        for (port, _), power in key:
            if port >= n_ports:
                break
            marginal[port] += power
        else:
            if tuple(marginal) == target:
                total += abs(_fock_amplitude(key, coeff)) ** 2
    return total


@dataclass(frozen=True)
class OracleProbability:
    value: float
    truncation_tail: float


def oracle_probability(config: ExperimentConfig, pattern: OutputPattern,
                       pair_cutoff: int | None = None) -> OracleProbability:
    """End-to-end oracle: build, propagate, detect."""
    state = build_input_state(config, pair_cutoff)
    state = apply_interferometer(state, config.interferometer)
    return OracleProbability(value=detection_probability(state, pattern),
                             truncation_tail=state.truncation_tail)


# ---------------------------------------------------------------------------
# regression corpus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionCase:
    name: str
    config: ExperimentConfig
    max_photons: int


@dataclass(frozen=True)
class RegressionRow:
    case: str
    pattern: tuple[int, ...]
    route: str
    formula: float
    oracle: float
    difference: float
    tail: float


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases.conj()


def regression_corpus(seed: int = 20311) -> list[RegressionCase]:
    """Deterministic set of small configs spanning every probability route.

    Covers M <= 3 ports, N <= 2 sources, spectra of up to 3 modes, identical
    / orthogonal / partially overlapping / non-degenerate internal states.
    Patterns up to four photons everywhere, plus one six-photon case.
    """
    rng = np.random.default_rng(seed)
    bs = Interferometer.beamsplitter()
    tilted = Interferometer.beamsplitter(0.8)
    u3 = Interferometer(_haar_unitary(3, rng))
    u3b = Interferometer(_haar_unitary(3, rng))
    u2 = Interferometer(_haar_unitary(2, rng))

    s1 = SchmidtSpectrum.single_mode(0)
    s2 = SchmidtSpectrum((0.7, 0.3), (0, 1))
    s2_shifted = SchmidtSpectrum((0.7, 0.3), (2, 3))
    s3 = SchmidtSpectrum((0.5, 0.3, 0.2), (0, 1, 2))
    s2b = SchmidtSpectrum((0.6, 0.4), (2, 3))
    s1b = SchmidtSpectrum.single_mode(4)
    s_overlap = SchmidtSpectrum((0.5, 0.5), (1, 2))

    def deg(r: float, port: int, spec: SchmidtSpectrum) -> SqueezedSource:
        return SqueezedSource(r=r, spectrum=spec, port=port)

    def nondeg(r: float, ports: tuple[int, int], phi: SchmidtSpectrum,
               psi: SchmidtSpectrum | None = None) -> SqueezedSource:
        return SqueezedSource(r=r, spectrum=phi, port=ports[0], kind="non-degenerate",
                              port2=ports[1], psi_spectrum=psi)

    cases = [
        ("bs-single-mode", bs, (deg(0.35, 0, s1), deg(0.35, 1, s1)), 4),
        ("bs-two-mode-identical", bs, (deg(0.3, 0, s2), deg(0.3, 1, s2)), 4),
        ("bs-two-mode-unequal-r", bs, (deg(0.4, 0, s2), deg(0.25, 1, s2)), 4),
        ("bs-three-mode-identical", bs, (deg(0.3, 0, s3), deg(0.35, 1, s3)), 4),
        ("tilted-two-mode-identical", tilted, (deg(0.3, 0, s2), deg(0.3, 1, s2)), 4),
        ("u2-two-mode-identical", u2, (deg(0.3, 0, s2), deg(0.35, 1, s2)), 4),
        ("bs-orthogonal-single-modes", bs, (deg(0.35, 0, s1), deg(0.3, 1, s1b)), 4),
        ("bs-orthogonal-multimode", bs, (deg(0.3, 0, s2), deg(0.35, 1, s2b)), 4),
        ("u2-orthogonal-multimode", u2, (deg(0.35, 0, s2), deg(0.3, 1, s2b)), 4),
        ("bs-partial-overlap", bs, (deg(0.3, 0, s2), deg(0.35, 1, s_overlap)), 4),
        ("u2-partial-overlap", u2, (deg(0.35, 0, s2), deg(0.3, 1, s_overlap)), 4),
        ("bs-single-source-multimode", bs, (deg(0.4, 0, s3),), 4),
        ("u3-single-source", u3, (deg(0.4, 1, s2),), 4),
        ("u3-two-sources-identical", u3, (deg(0.3, 0, s2), deg(0.3, 1, s2)), 4),
        ("u3-two-sources-orthogonal", u3, (deg(0.3, 0, s2), deg(0.3, 2, s2b)), 4),
        ("u3b-two-sources-partial", u3b, (deg(0.3, 0, s2), deg(0.3, 2, s_overlap)), 4),
        ("bs-nondegenerate-identical", bs, (nondeg(0.4, (0, 1), s2),), 4),
        ("bs-nondegenerate-split-bases", bs, (nondeg(0.4, (0, 1), s2, s2_shifted),), 4),
        ("u3-nondegenerate", u3, (nondeg(0.35, (0, 2), s2),), 4),
        ("u3-mixed-kinds", u3, (deg(0.3, 1, s2), nondeg(0.3, (0, 2), s2)), 4),
        ("bs-two-mode-six-photon", bs, (deg(0.3, 0, s2), deg(0.3, 1, s2)), 6),
    ]
    return [RegressionCase(name=name,
                           config=ExperimentConfig(interferometer=itf, sources=srcs),
                           max_photons=photons)
            for name, itf, srcs, photons in cases]


def run_regression(cases: Sequence[RegressionCase] | None = None,
                   tolerance: float = 1e-9) -> list[RegressionRow]:
    """Compare every formula route against the oracle on the corpus.

    Returns one row per (case, pattern); a row passes when the absolute
    difference stays within ``tolerance`` (the oracle value itself is exact
    up to rounding at these photon numbers).
    """
    from . import distprob

    if cases is None:
        cases = regression_corpus()
    rows: list[RegressionRow] = []
    for case in cases:
        cutoff = max(case.max_photons // 2, case.config.options.oracle_pair_cutoff)
        state = build_input_state(case.config, pair_cutoff=cutoff)
        state = apply_interferometer(state, case.config.interferometer)
        route = distprob.probability_route(case.config)
        for photons in range(0, case.max_photons + 1, 2):
            for pattern in iter_patterns(case.config.n_ports, photons):
                formula = distprob.probability(case.config, pattern)
                reference = detection_probability(state, pattern)
                rows.append(RegressionRow(
                    case=case.name, pattern=pattern.counts, route=route,
                    formula=formula, oracle=reference,
                    difference=abs(formula - reference),
                    tail=state.truncation_tail))
    return rows
