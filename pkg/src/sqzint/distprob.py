"""Output probabilities of partially distinguishable squeezed light.

Three routes, ordered by generality:

* ``probability_identical`` -- every source carries the same internal pair
  state.  Double sum over matching pairs, each weighted by a product of
  spectrum moments determined by the relative cycle type.
* ``probability_orthogonal`` -- sources occupy mutually orthogonal internal
  subspaces.  The joint distribution is the convolution of the single-source
  distributions over all splittings of the output pattern.
* ``probability_general`` -- arbitrary internal pair states, evaluated by the
  full double sum over S_2n with the 1/(2^n n!)^2 prefactor.  Exponentially
  expensive; guarded by ``options.bruteforce_limit``.

``probability`` dispatches to the cheapest applicable route.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import matchings as mt
from ._parallel import chunked_sum
from .errors import ResourceLimitError, ToleranceError, ValidationError
from .hafnian import ideal_probability
from .model import (ExperimentConfig, OutputPattern, SchmidtSpectrum, SqueezedSource,
                    a_matrix, iter_patterns, vacuum_probability)

IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class DistinguishabilityWeights:
    """Spectrum moments (M_2, ..., M_n) entering the cycle weights."""

    moments: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "moments", tuple(float(m) for m in self.moments))
        seq = (1.0,) + self.moments
        for a, b in zip(seq, seq[1:]):
            if not -1e-12 <= b <= a + 1e-12:
                raise ValidationError(f"moments must decrease from 1 to 0, got {self.moments}")

    @classmethod
    def from_spectrum(cls, spectrum: SchmidtSpectrum, n: int) -> "DistinguishabilityWeights":
        return cls(tuple(spectrum.moment(k) for k in range(2, n + 1)))

    @property
    def purity(self) -> float:
        return self.moments[0] if self.moments else 1.0

    def cycle_weight(self, counts: tuple[int, ...]) -> float:
        """prod_{k>=2} M_k^{C_k}; 1-cycles contribute nothing."""
        w = 1.0
        for k in range(2, len(counts) + 1):
            c = counts[k - 1]
            if c:
                w *= self.moments[k - 2] ** c
        return w


def j_function(matching: mt.Matching, spectrum: SchmidtSpectrum) -> float:
    """Distinguishability weight of one matching against the trivial pairing.

    A k-cycle of the matching on the double set contributes the moment
    M_k = sum_j p_j^k; fixed points contribute 1.  The trivial matching maps
    to 1, and a single-mode spectrum gives 1 for every matching.
    """
    ctype = mt.double_set_cycle_type(matching)
    weights = DistinguishabilityWeights.from_spectrum(spectrum, matching.n)
    return weights.cycle_weight(ctype.counts)


@lru_cache(maxsize=16)
def _matching_tables(n: int) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]:
    """(canonical vectors, partner maps) for all matchings of {1..2n}."""
    vectors = tuple(iter_matching_vectors_unrestricted(n))
    partners = tuple(tuple(mt.partner_map(v)) for v in vectors)
    return vectors, partners


def iter_matching_vectors_unrestricted(n: int):
    # internal: the probability guards are photon-count based, not n-based
    return mt.iter_matching_vectors(n, limit=max(n, mt.DEFAULT_MATCHING_LIMIT))


def _matching_products(A: np.ndarray, vectors: tuple[tuple[int, ...], ...]) -> np.ndarray:
    prods = np.empty(len(vectors), dtype=complex)
    for idx, vec in enumerate(vectors):
        term = 1.0 + 0j
        for i in range(0, len(vec), 2):
            term *= A[vec[i] - 1, vec[i + 1] - 1]
        prods[idx] = term
    return prods


def _double_matching_sum(A: np.ndarray, weights: DistinguishabilityWeights,
                         n: int, threads: int = 1) -> complex:
    """sum_{alpha,beta} W(ctype(alpha,beta)) conj(T_alpha) T_beta."""
    vectors, partners = _matching_tables(n)
    prods = _matching_products(A, vectors)
    weight_cache: dict[tuple[int, ...], float] = {}

    def eval_rows(start: int, stop: int) -> complex:
        total = 0j
        for ia in range(start, stop):
            ta = prods[ia].conjugate()
            if ta == 0:
                continue
            pa = partners[ia]
            row = 0j
            for ib, pb in enumerate(partners):
                tb = prods[ib]
                if tb == 0:
                    continue
                counts = mt.relative_cycle_counts(pa, pb, n)
                w = weight_cache.get(counts)
                if w is None:
                    w = weights.cycle_weight(counts)
                    weight_cache[counts] = w
                row += w * tb
            total += ta * row
        return total

    return chunked_sum(eval_rows, len(vectors), threads=threads, chunk_size=64)


def _resolve_common_spectrum(config: ExperimentConfig,
                             spectrum: SchmidtSpectrum | None) -> SchmidtSpectrum:
    if spectrum is not None:
        return spectrum
    shared = config.shared_spectrum()
    if shared is None:
        raise ValidationError(
            "sources carry different internal states; use probability_general "
            "(or pass an explicit common spectrum)")
    return shared


def _check_pattern(config: ExperimentConfig, pattern: OutputPattern) -> None:
    if len(pattern.counts) != config.n_ports:
        raise ValidationError("pattern length does not match interferometer size")


def probability_identical(config: ExperimentConfig, pattern: OutputPattern,
                          spectrum: SchmidtSpectrum | None = None,
                          threads: int | None = None) -> float:
    """Output probability when all sources share one internal pair state.

    Evaluates the double matching sum with cycle-type moment weights.  With
    a single-mode spectrum this reduces exactly to the hafnian expression.
    ``spectrum`` overrides the sources' common spectrum when given.
    """
    _check_pattern(config, pattern)
    spectrum = _resolve_common_spectrum(config, spectrum)
    if pattern.total % 2:
        return 0.0
    p0 = vacuum_probability(config, spectrum=spectrum)
    if pattern.total == 0:
        return p0
    if pattern.total > config.options.photon_cutoff:
        raise ResourceLimitError(
            f"pattern has {pattern.total} photons; photon_cutoff is "
            f"{config.options.photon_cutoff}")
    n = pattern.n_pairs
    A = a_matrix(config, pattern)
    weights = DistinguishabilityWeights.from_spectrum(spectrum, n)
    total = _double_matching_sum(
        A, weights, n,
        threads=threads if threads is not None else config.options.threads)
    if abs(total) > 0 and abs(total.imag) > IMAG_RESIDUE_TOL * abs(total):
        raise ToleranceError(f"imaginary residue {total.imag:.3e} exceeds tolerance")
    return max(p0 * total.real / pattern.factorial(), 0.0)


# ---------------------------------------------------------------------------
# four photons in closed form
# ---------------------------------------------------------------------------

def four_photon_probability(A: np.ndarray, purity: float, p0: float,
                            pattern: OutputPattern) -> float:
    """Closed form for |m| = 4 from the 4 x 4 pair-amplitude matrix.

    The three diagonal terms are the squared matching products; the cross
    terms carry one factor of the purity each.
    """
    if pattern.total != 4:
        raise ValidationError("closed form applies to four-photon patterns only")
    A = np.asarray(A, dtype=complex)
    if A.shape != (4, 4):
        raise ValidationError("expected a 4 x 4 matrix")
    t12 = A[0, 1] * A[2, 3]
    t13 = A[0, 2] * A[1, 3]
    t14 = A[0, 3] * A[1, 2]
    value = (abs(t12) ** 2 + abs(t13) ** 2 + abs(t14) ** 2
             + 2.0 * purity * ((t13.conjugate() + t14.conjugate()) * t12
                               + t13.conjugate() * t14).real)
    return p0 * value / pattern.factorial()


def beamsplitter_conditionals(purity: float) -> tuple[float, float, float]:
    """Four-photon conditionals (P_40, P_04, P_22) for two equal sources on a
    balanced beamsplitter, as a function of the common spectrum's purity."""
    if not 0.0 < purity <= 1.0:
        raise ValidationError("purity must be in (0, 1]")
    bunched = (1.0 + 2.0 * purity) / (4.0 + 4.0 * purity)
    return bunched, bunched, 1.0 / (2.0 + 2.0 * purity)


# ---------------------------------------------------------------------------
# orthogonal internal states
# ---------------------------------------------------------------------------

def _single_source_config(config: ExperimentConfig, source: SqueezedSource) -> ExperimentConfig:
    return ExperimentConfig(interferometer=config.interferometer, sources=(source,),
                            options=config.options)


def _single_source_probability(config: ExperimentConfig, pattern: OutputPattern,
                               threads: int | None) -> float:
    src = config.sources[0]
    phi, psi = src.spectrum, src.psi
    if phi.weights == psi.weights and phi.basis == psi.basis:
        return probability_identical(config, pattern, threads=threads)
    return probability_general(config, pattern)


def probability_orthogonal(config: ExperimentConfig, pattern: OutputPattern,
                           threads: int | None = None) -> float:
    """Output probability when distinct sources occupy disjoint internal bases.

    Convolution of single-source probabilities over every way of splitting
    the output pattern; splittings that hand any source an odd photon number
    vanish.
    """
    _check_pattern(config, pattern)
    if not config.spectra_disjoint():
        raise ValidationError("sources share internal-mode labels; "
                              "use probability_identical or probability_general")
    if pattern.total % 2:
        return 0.0
    sub_configs = [_single_source_config(config, src) for src in config.sources]
    n_src = len(sub_configs)
    m = pattern.counts
    n_ports = len(m)
    cache: list[dict[tuple[int, ...], float]] = [{} for _ in range(n_src)]

    def source_prob(k: int, part: tuple[int, ...]) -> float:
        value = cache[k].get(part)
        if value is None:
            value = _single_source_probability(sub_configs[k], OutputPattern(part), threads)
            cache[k][part] = value
        return value

    total = 0.0
    splits_per_port = [list(_port_splits(c, n_src)) for c in m]
    for combo in itertools.product(*splits_per_port):
        parts = [tuple(combo[port][k] for port in range(n_ports)) for k in range(n_src)]
        if any(sum(p) % 2 for p in parts):
            continue
        term = 1.0
        for k, part in enumerate(parts):
            term *= source_prob(k, part)
            if term == 0.0:
                break
        total += term
    return total


def _port_splits(count: int, n_src: int):
    """All ways to split ``count`` photons of one port among ``n_src`` sources."""
    if n_src == 1:
        yield (count,)
        return
    for head in range(count + 1):
        for tail in _port_splits(count - head, n_src - 1):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# fully general internal states
# ---------------------------------------------------------------------------

def probability_general(config: ExperimentConfig, pattern: OutputPattern) -> float:
    """Brute-force output probability for arbitrary internal pair states.

    Full double sum over S_2n with the 1/(2^n n!)^2 prefactor, evaluated by
    expanding every pair state over its Schmidt basis and grouping terms by
    the per-detector internal-label assignment; equal labels contract to 1,
    different labels to 0, so the double sum collapses to a sum of squared
    grouped amplitudes.  A pair from a non-degenerate source enters with
    coefficient 2r (its expansion carries r against r/2 in the degenerate
    case).
    """
    _check_pattern(config, pattern)
    if pattern.total % 2:
        return 0.0
    p0 = vacuum_probability(config)
    if pattern.total == 0:
        return p0
    if pattern.total > config.options.bruteforce_limit:
        raise ResourceLimitError(
            f"pattern has {pattern.total} photons; bruteforce_limit is "
            f"{config.options.bruteforce_limit}")
    two_n = pattern.total
    n = two_n // 2
    U = config.interferometer.matrix
    cols = pattern.port_multiset()
    sources = config.sources
    pair_coeff = [2.0 * s.r if s.kind == "non-degenerate" else s.r for s in sources]
    pair_ports = [s.pair_ports() for s in sources]
    pair_terms = [s.pair_terms() for s in sources]

    amplitudes: dict[tuple[int, ...], complex] = {}
    for tau in itertools.permutations(range(two_n)):
        for kvec in itertools.product(range(len(sources)), repeat=n):
            base = 1.0 + 0j
            for i, k in enumerate(kvec):
                q1, q2 = pair_ports[k]
                base *= pair_coeff[k] * U[q1, cols[tau[2 * i]]] * U[q2, cols[tau[2 * i + 1]]]
                if base == 0:
                    break
            if base == 0:
                continue
            for jvec in itertools.product(*(range(len(pair_terms[k])) for k in kvec)):
                coeff = base
                labels = [0] * two_n
                for i, (k, j) in enumerate(zip(kvec, jvec)):
                    g1, g2, weight = pair_terms[k][j]
                    coeff *= math.sqrt(weight)
                    labels[tau[2 * i]] = g1
                    labels[tau[2 * i + 1]] = g2
                key = tuple(labels)
                amplitudes[key] = amplitudes.get(key, 0j) + coeff
    total = math.fsum(abs(a) ** 2 for a in amplitudes.values())
    prefactor = p0 / pattern.factorial() / (2 ** n * math.factorial(n)) ** 2
    return prefactor * total


def probability(config: ExperimentConfig, pattern: OutputPattern,
                threads: int | None = None) -> float:
    """Output probability via the cheapest applicable route."""
    if config.shared_spectrum() is not None:
        return probability_identical(config, pattern, threads=threads)
    if config.spectra_disjoint():
        return probability_orthogonal(config, pattern, threads=threads)
    return probability_general(config, pattern)


def probability_route(config: ExperimentConfig) -> str:
    if config.shared_spectrum() is not None:
        return "identical"
    if config.spectra_disjoint():
        return "orthogonal"
    return "general"


# ---------------------------------------------------------------------------
# symmetric-part decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionRow:
    counts: tuple[int, ...]
    probability: float        # p_m from the matching double sum
    symmetric_part: float     # hafnian expression with the actual vacuum prob
    residual: float           # p_m - q_2n * symmetric_part (>= 0 in exact arithmetic)
    q: float                  # q_2n of the pattern's pair sector

    @property
    def perp(self) -> float:
        """Residual rescaled by 1 - q_2n; zero where no orthogonal part exists
        (the internal state of zero or one pair is always symmetric)."""
        if self.q >= 1.0:
            return 0.0
        return self.residual / (1.0 - self.q)


@dataclass(frozen=True)
class SymmetryDecomposition:
    """Split p_m = q_2n * symmetric_part_m + residual_m over a truncated
    pattern space.

    The residual is non-negative pattern by pattern; its rescaled form
    ``perp`` carries the distinguishable share of the distribution.
    ``perp_distribution`` conditions on that share, so it sums to 1 whenever
    any residual exists.
    """

    rows: tuple[DecompositionRow, ...]
    q_by_pairs: dict[int, float]
    accounted_mass: float

    @property
    def residual_min(self) -> float:
        return min((row.residual for row in self.rows), default=0.0)

    @property
    def perp_weight(self) -> float:
        return math.fsum(row.perp for row in self.rows)

    def perp_distribution(self) -> dict[tuple[int, ...], float]:
        weight = self.perp_weight
        if weight <= 0.0:
            return {}
        return {row.counts: row.perp / weight for row in self.rows if row.perp != 0.0}


def symmetry_decomposition(config: ExperimentConfig, max_photons: int | None = None,
                           threads: int | None = None) -> SymmetryDecomposition:
    """Evaluate the symmetric/residual split for every even pattern up to
    ``max_photons`` (default: the config's photon cutoff)."""
    from .measure import q2n  # deferred: measure sits above this module

    spectrum = _resolve_common_spectrum(config, None)
    if max_photons is None:
        max_photons = config.options.photon_cutoff
    rows: list[DecompositionRow] = []
    q_by_pairs: dict[int, float] = {}
    accounted = 0.0
    for photons in range(0, max_photons + 1, 2):
        n = photons // 2
        q = 1.0 if n == 0 else q2n(spectrum, n)
        q_by_pairs[n] = q
        for pattern in iter_patterns(config.n_ports, photons):
            p = probability_identical(config, pattern, threads=threads)
            p_sym = ideal_probability(config, pattern, threads=threads)
            rows.append(DecompositionRow(counts=pattern.counts, probability=p,
                                         symmetric_part=p_sym, residual=p - q * p_sym, q=q))
            accounted += p
    return SymmetryDecomposition(rows=tuple(rows), q_by_pairs=q_by_pairs,
                                 accounted_mass=accounted)
