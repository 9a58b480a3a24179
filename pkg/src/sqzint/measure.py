"""Indistinguishability measure q_2n, photon-number statistics and bounds.

q_2n is the probability that the internal state of n photon pairs is
permutation symmetric, i.e. that 2n detected photons interfere as
indistinguishable.  It is computed by two independent routes that must agree
to 1e-12: a composition sum over mode occupations with central binomial
factors, and a sum over matching cycle types weighted by spectrum moments.

The same module holds the photon-number distribution of the sources (which
no interferometer can change), the averaged measure with its
total-variation bound, and the dominant-mode-plus-noise estimator used for
experiment-scale predictions.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matchings as mt
from .errors import ResourceLimitError, ToleranceError, ValidationError
from .model import SchmidtSpectrum, SqueezedSource

TWO_ROUTE_TOL = 1e-12


# ---------------------------------------------------------------------------
# q_2n
# ---------------------------------------------------------------------------

def q2n_binomial_route(spectrum: SchmidtSpectrum, n: int) -> float:
    """Composition-sum route.

    C(2n,n)^{-1} sum over occupations s (|s| = n) of prod_j C(2s_j, s_j)
    p_j^{s_j}, accumulated mode by mode as a truncated series product.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    binom = [math.comb(2 * s, s) for s in range(n + 1)]
    series = np.zeros(n + 1)
    series[0] = 1.0
    for p in spectrum.weights:
        mode = np.array([binom[s] * p ** s for s in range(n + 1)])
        series = np.convolve(series, mode)[: n + 1]
    return float(series[n]) / binom[n]


def q2n_cycle_route(spectrum: SchmidtSpectrum, n: int) -> float:
    """Cycle-type route: average of the matching weights, summed in closed
    form over cycle types with the exact per-type matching counts."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    moments = [spectrum.moment(k) for k in range(n + 1)]
    total = 0.0
    for ctype in mt.cycle_types(n):
        term = float(mt.count_by_cycle_type(n, ctype))
        for k in range(2, n + 1):
            c = ctype.counts[k - 1]
            if c:
                term *= moments[k] ** c
        total += term
    return total / mt.matching_count(n)


def q2n_composition_enumeration(spectrum: SchmidtSpectrum, n: int,
                                max_terms: int = 2_000_000) -> float:
    """Literal composition enumeration (test reference; prunes tiny products)."""
    modes = len(spectrum.weights)
    if math.comb(n + modes - 1, modes - 1) > max_terms:
        raise ResourceLimitError("composition enumeration too large")
    total = 0.0
    for split in _compositions(n, modes):
        term = 1.0
        for s, p in zip(split, spectrum.weights):
            term *= math.comb(2 * s, s) * p ** s
            if term < 1e-300:
                break
        else:
            total += term
    return total / math.comb(2 * n, n)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


CYCLE_CROSSCHECK_LIMIT = 12


def q2n(spectrum: SchmidtSpectrum, n: int) -> float:
    """Probability that n photon pairs interfere as indistinguishable.

    The composition route provides the value; up to n = 12 (where the number
    of cycle types stays small) the cycle route is also evaluated and must
    agree to 1e-12 relative.  q_2 = 1 always; the value is bounded below by
    1/(2n-1)!!.
    """
    a = q2n_binomial_route(spectrum, n)
    if n <= CYCLE_CROSSCHECK_LIMIT:
        b = q2n_cycle_route(spectrum, n)
        if abs(a - b) > TWO_ROUTE_TOL * max(abs(a), abs(b), 1e-300):
            raise ToleranceError(f"q2n routes disagree: {a!r} vs {b!r}")
    return a


def q2n_floor(n: int) -> float:
    """Lowest possible q_2n for identical internal states: 1/(2n-1)!!."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return 1.0 / mt.matching_count(n)


def q4_closed_form(purity: float) -> float:
    """q_4 = (1 + 2 P)/3 for any spectrum of purity P."""
    if not 0.0 < purity <= 1.0:
        raise ValidationError("purity must be in (0, 1]")
    return (1.0 + 2.0 * purity) / 3.0


PairState = SchmidtSpectrum | tuple[SchmidtSpectrum, SchmidtSpectrum]


def q2n_general(pair_spectra: Sequence[PairState], n: int | None = None,
                photon_limit: int = 6) -> float:
    """Symmetric-part probability for pairs with arbitrary internal states.

    ``pair_spectra`` holds one entry per photon pair: the Schmidt spectrum of
    the pair's source (a two-spectrum tuple for a non-degenerate pair whose
    polarizations carry different mode sets).  Basis indices establish which
    modes coincide across pairs.  Evaluates the average of the full
    symmetrizer, (2n)!^{-1} sum over S_2n of the internal overlap, by brute
    force; reduces to :func:`q2n` when all pairs share one spectrum.
    """
    pairs = [(ps, ps) if isinstance(ps, SchmidtSpectrum) else tuple(ps)
             for ps in pair_spectra]
    if n is None:
        n = len(pairs)
    if n != len(pairs):
        raise ValidationError(f"{len(pairs)} pair states given but n = {n}")
    if n < 1:
        raise ValidationError("need at least one pair")
    two_n = 2 * n
    if two_n > photon_limit:
        raise ResourceLimitError(
            f"{two_n} photons exceed the brute-force limit {photon_limit}")
    for phi, psi in pairs:
        if phi.weights != psi.weights:
            raise ValidationError("pair polarizations share one set of weights")

    terms = [tuple((phi.basis[j], psi.basis[j], phi.weights[j])
                   for j in range(phi.n_modes)) for phi, psi in pairs]
    # amplitude of each internal label tuple in the n-pair product state
    amp: dict[tuple[int, ...], float] = {}
    for choice in itertools.product(*(range(len(t)) for t in terms)):
        weight = 1.0
        labels: list[int] = []
        for t, j in zip(terms, choice):
            g1, g2, p = t[j]
            weight *= math.sqrt(p)
            labels.extend((g1, g2))
        key = tuple(labels)
        amp[key] = amp.get(key, 0.0) + weight
    keys = list(amp.items())
    total = 0.0
    for sigma in itertools.permutations(range(two_n)):
        for bra, wb in keys:
            permuted = tuple(bra[s] for s in sigma)
            wk = amp.get(permuted)
            if wk is not None:
                total += wb * wk
    return total / math.factorial(two_n)


# ---------------------------------------------------------------------------
# photon-number statistics
# ---------------------------------------------------------------------------

def _mode_pair_pmf(r_mode: float, n_max: int, degenerate: bool) -> np.ndarray:
    """Pair-count distribution of one Schmidt mode with amplitude ``r_mode``."""
    counts = np.arange(n_max + 1)
    if degenerate:
        weights = np.array([math.comb(2 * a, a) for a in counts], dtype=float)
        return math.sqrt(1.0 - r_mode ** 2) * weights * (r_mode / 2.0) ** (2 * counts)
    return (1.0 - r_mode ** 2) * r_mode ** (2 * counts)


def _source_pair_pmf(source: SqueezedSource, n_max: int) -> np.ndarray:
    pmf = np.zeros(n_max + 1)
    pmf[0] = 1.0
    degenerate = source.kind == "degenerate"
    for w in source.spectrum.weights:
        mode = _mode_pair_pmf(source.r * math.sqrt(w), n_max, degenerate)
        pmf = np.convolve(pmf, mode)[: n_max + 1]
    return pmf


def _ideal_source_pair_pmf(source: SqueezedSource, n_max: int) -> np.ndarray:
    return _mode_pair_pmf(source.r, n_max, source.kind == "degenerate")


def _combined_pmf(sources: Sequence[SqueezedSource], n_max: int, ideal: bool) -> np.ndarray:
    pmf = np.zeros(n_max + 1)
    pmf[0] = 1.0
    for src in sources:
        part = _ideal_source_pair_pmf(src, n_max) if ideal else _source_pair_pmf(src, n_max)
        pmf = np.convolve(pmf, part)[: n_max + 1]
    return pmf


def photon_number_distribution(sources: Sequence[SqueezedSource], n: int) -> float:
    """Probability that the sources emit exactly ``n`` photon pairs.

    Convolution over every Schmidt mode of every source; independent of the
    interferometer.  n = 0 recovers the vacuum probability.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    return float(_combined_pmf(tuple(sources), n, ideal=False)[n])


def ideal_photon_number_distribution(sources: Sequence[SqueezedSource], n: int) -> float:
    """Pair-count distribution the same squeezing amplitudes would give with
    single-mode internal states (the reference for the averaged measure)."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    return float(_combined_pmf(tuple(sources), n, ideal=True)[n])


def equal_r_pair_distribution(n_sources: int, r: float, n: int) -> float:
    """Closed form for N equal single-mode degenerate sources.

    (1 - r^2)^{N/2} (N/2)_n r^{2n} / n!, evaluated in log space so large N
    and n do not overflow.  Negative-binomial shape with N/2 successes.
    """
    if not 0.0 < r < 1.0:
        raise ValidationError("need 0 < r < 1")
    if n_sources < 1 or n < 0:
        raise ValidationError("need n_sources >= 1 and n >= 0")
    half = n_sources / 2.0
    log_p = (half * math.log1p(-r * r) + math.lgamma(half + n) - math.lgamma(half)
             + 2.0 * n * math.log(r) - math.lgamma(n + 1)) if n else half * math.log1p(-r * r)
    return math.exp(log_p)


def mean_pairs_and_dispersion(n_sources: int, r: float) -> tuple[float, float]:
    """Mean photon-pair number and relative dispersion for N equal sources.

    nbar = (N/2) r^2/(1-r^2); relative dispersion (var/nbar^2) = 2/(N r^2).
    """
    if not 0.0 < r < 1.0:
        raise ValidationError("need 0 < r < 1")
    if n_sources < 1:
        raise ValidationError("need at least one source")
    nbar = 0.5 * n_sources * r * r / (1.0 - r * r)
    dispersion = 2.0 / (n_sources * r * r)
    return nbar, dispersion


# ---------------------------------------------------------------------------
# averaged measure and variation-distance bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QbarBound:
    """Averaged indistinguishability and the total-variation bound 1 - qbar."""

    qbar: float
    tvd_bound: float
    tail_mass: float
    cutoff_pairs: int
    tail_ok: bool


def qbar_and_tvd_bound(sources: Sequence[SqueezedSource], spectrum: SchmidtSpectrum,
                       cutoff_pairs: int | None = None,
                       tail_tol: float = 1e-8) -> QbarBound:
    """qbar = sum_n p(2n) q_2n over the ideal pair-count distribution.

    The distance between the real and ideal output distributions is bounded
    by 1 - qbar.  The cutoff grows until the ideal distribution's tail mass
    drops below ``tail_tol`` (reported either way; qbar is exact up to that
    tail, which only ever increases it).
    """
    sources = tuple(sources)
    if cutoff_pairs is None:
        cutoff_pairs = 16
        while cutoff_pairs < 4096:
            pmf = _combined_pmf(sources, cutoff_pairs, ideal=True)
            if 1.0 - float(pmf.sum()) < tail_tol:
                break
            cutoff_pairs *= 2
    pmf = _combined_pmf(sources, cutoff_pairs, ideal=True)
    tail = max(1.0 - float(pmf.sum()), 0.0)
    qbar = float(pmf[0])
    for n in range(1, cutoff_pairs + 1):
        if pmf[n] > 0.0:
            qbar += float(pmf[n]) * q2n(spectrum, n)
    return QbarBound(qbar=qbar, tvd_bound=1.0 - qbar, tail_mass=tail,
                     cutoff_pairs=cutoff_pairs, tail_ok=tail < tail_tol)


# ---------------------------------------------------------------------------
# dominant-mode-plus-noise estimate
# ---------------------------------------------------------------------------

def noise_amplitude_from_purity(purity: float) -> float:
    """Smaller root of (1-eps)^2 + eps^2 = purity."""
    if not 0.5 < purity <= 1.0:
        raise ValidationError("the two-mode noise model needs purity in (1/2, 1]")
    return 0.5 * (1.0 - math.sqrt(2.0 * purity - 1.0))


def q_two_mode_exact(epsilon: float, n_pairs: int) -> float:
    """q_2n for the spectrum (1-eps, eps) at integer pair number, as the
    explicit binomial sum."""
    if not 0.0 <= epsilon < 0.5:
        raise ValidationError("need 0 <= epsilon < 1/2")
    if n_pairs < 0:
        raise ValidationError("n_pairs must be >= 0")
    if n_pairs == 0:
        return 1.0
    total = 0.0
    for s in range(n_pairs + 1):
        total += (math.comb(2 * s, s) * math.comb(2 * (n_pairs - s), n_pairs - s)
                  * epsilon ** s * (1.0 - epsilon) ** (n_pairs - s))
    return total / math.comb(2 * n_pairs, n_pairs)


def q_two_mode_hypergeometric(epsilon: float, n_pairs: int) -> float:
    """Same quantity via (1-eps)^n F(1/2, -n, 1/2 - n; eps/(1-eps)).

    The Gauss series terminates because of the negative integer parameter;
    agrees with :func:`q_two_mode_exact` to machine precision.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValidationError("need 0 <= epsilon < 1/2")
    if n_pairs == 0:
        return 1.0
    x = epsilon / (1.0 - epsilon)
    term = 1.0
    total = 0.0
    for s in range(n_pairs + 1):
        total += term
        term *= (0.5 + s) * (s - n_pairs) / (0.5 - n_pairs + s) * x / (s + 1)
    return (1.0 - epsilon) ** n_pairs * total


@dataclass(frozen=True)
class TwoModeNoiseEstimate:
    purity: float
    epsilon: float
    photons: float
    nbar: float             # photons / 2, possibly half-integer
    q_approx: float         # (1 - eps)^nbar
    q_exact_floor: float    # binomial sum at floor(nbar)
    q_exact_ceil: float     # binomial sum at ceil(nbar)
    q_exact: float          # linear interpolation between the two


def two_mode_noise_estimate(purity: float, photons: float) -> TwoModeNoiseEstimate:
    """Experiment-scale indistinguishability estimate from purity alone.

    Models the spectrum as a dominant mode plus noise (1-eps, eps), solves
    eps from the purity and evaluates q at nbar = photons/2 pairs.  Odd
    photon counts give a half-integer nbar: the exact sum is evaluated at
    the two neighbouring integers and interpolated, while the approximation
    (1-eps)^nbar takes the real exponent directly.
    """
    if photons <= 0:
        raise ValidationError("photons must be positive")
    epsilon = noise_amplitude_from_purity(purity)
    nbar = photons / 2.0
    lo = math.floor(nbar)
    hi = math.ceil(nbar)
    q_lo = q_two_mode_exact(epsilon, lo)
    q_hi = q_two_mode_exact(epsilon, hi)
    frac = nbar - lo
    return TwoModeNoiseEstimate(
        purity=purity, epsilon=epsilon, photons=photons, nbar=nbar,
        q_approx=(1.0 - epsilon) ** nbar,
        q_exact_floor=q_lo, q_exact_ceil=q_hi,
        q_exact=q_lo + frac * (q_hi - q_lo))


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndistinguishabilityReport:
    """Everything the measure computes for one source set, JSON-serializable."""

    q_by_pairs: dict[int, float]
    qbar: float
    tvd_bound: float
    photon_dist: dict[int, float]   # n -> ideal p(2n)
    mean_pairs: float
    relative_dispersion: float
    tail_mass: float

    def to_dict(self) -> dict:
        return {
            "q_by_pairs": {str(k): v for k, v in self.q_by_pairs.items()},
            "qbar": self.qbar,
            "tvd_bound": self.tvd_bound,
            "photon_dist": {str(k): v for k, v in self.photon_dist.items()},
            "mean_pairs": self.mean_pairs,
            "relative_dispersion": self.relative_dispersion,
            "tail_mass": self.tail_mass,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def build_report(sources: Sequence[SqueezedSource], spectrum: SchmidtSpectrum,
                 max_pairs: int = 16, tail_tol: float = 1e-8) -> IndistinguishabilityReport:
    sources = tuple(sources)
    bound = qbar_and_tvd_bound(sources, spectrum, tail_tol=tail_tol)
    pmf = _combined_pmf(sources, max_pairs, ideal=True)
    ns = np.arange(max_pairs + 1)
    mean = float(np.dot(ns, pmf))
    second = float(np.dot(ns * ns, pmf))
    var = second - mean * mean
    return IndistinguishabilityReport(
        q_by_pairs={n: (1.0 if n == 0 else q2n(spectrum, n)) for n in range(max_pairs + 1)},
        qbar=bound.qbar,
        tvd_bound=bound.tvd_bound,
        photon_dist={n: float(pmf[n]) for n in range(max_pairs + 1)},
        mean_pairs=mean,
        relative_dispersion=(var / mean ** 2 if mean > 0 else 0.0),
        tail_mass=bound.tail_mass)
