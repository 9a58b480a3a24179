"""Hafnian by exact matching enumeration, and ideal output probabilities.

The hafnian of a symmetric 2n x 2n matrix is the sum over all (2n-1)!! pair
partitions of the product of the matching entries.  Direct enumeration is
exact and shares its backbone with the distinguishability-weighted sums, so
the same code path is exercised by both.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matchings as mt
from ._parallel import chunked_sum
from .errors import ResourceLimitError, ValidationError
from .model import ExperimentConfig, OutputPattern, a_matrix, vacuum_probability

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class HafnianResult:
    value: complex
    n_terms: int  # (2n-1)!!


def _check_input(A: np.ndarray, sym_tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] % 2:
        raise ValidationError("hafnian requires an even dimension")
    if A.size:
        scale = max(1.0, float(np.max(np.abs(A))))
        asym = float(np.max(np.abs(A - A.T)))
        if asym > sym_tol * scale:
            raise ValidationError(f"matrix asymmetry {asym:.3e} exceeds tolerance")
    return A


def _haf_rank_range(A: np.ndarray, free: tuple[int, ...], start: int, stop: int) -> complex:
    """Matching-product sum restricted to lexicographic ranks [start, stop).

    The first free element's partner choice i covers a contiguous rank block
    of size (|free| - 3)!!, so the recursion walks only the requested slice
    while still sharing prefix products.
    """
    if not free:
        return 1.0 + 0j
    first = free[0]
    rest = free[1:]
    block = mt.matching_count(len(rest) // 2)
    total = 0j
    for i, partner in enumerate(rest):
        lo = i * block
        if lo >= stop:
            break
        hi = lo + block
        if hi <= start:
            continue
        entry = A[first, partner]
        if entry != 0:
            total += entry * _haf_rank_range(A, rest[:i] + rest[i + 1:],
                                             max(start, lo) - lo, min(stop, hi) - lo)
    return total


def hafnian(A: np.ndarray, sym_tol: float = SYMMETRY_TOL, threads: int = 1) -> complex:
    """Exact hafnian of a symmetric even-dimensional matrix.

    Diagonal entries are never read.  The empty matrix has hafnian 1.  The
    matching sum runs over fixed chunks of the lexicographic enumeration
    order whatever the thread count, so the result is bit-identical for any
    ``threads``.
    """
    A = _check_input(A, sym_tol)
    n = A.shape[0] // 2
    if n == 0:
        return 1.0 + 0j
    free = tuple(range(2 * n))
    return chunked_sum(lambda a, b: _haf_rank_range(A, free, a, b),
                       mt.matching_count(n), threads=threads)


def hafnian_info(A: np.ndarray, sym_tol: float = SYMMETRY_TOL, threads: int = 1) -> HafnianResult:
    A = _check_input(A, sym_tol)
    return HafnianResult(value=hafnian(A, sym_tol, threads),
                         n_terms=mt.matching_count(A.shape[0] // 2))


def ideal_probability(config: ExperimentConfig, pattern: OutputPattern,
                      threads: int | None = None) -> float:
    """Output probability when all photons interfere as indistinguishable.

    p = (p0 / m!) |Haf(A)|^2 with A from :func:`sqzint.model.a_matrix` and p0
    the config's zero-photon probability.  Odd photon numbers have
    probability 0.  For multimode spectra this is the symmetric-part
    reference distribution entering the indistinguishable/residual split; it
    coincides with the physical distribution exactly when every source is
    single-mode.
    """
    if pattern.total % 2:
        return 0.0
    p0 = vacuum_probability(config)
    if pattern.total == 0:
        return p0
    if pattern.n_pairs > config.options.matching_limit:
        raise ResourceLimitError(
            f"pattern has {pattern.n_pairs} pairs; limit is {config.options.matching_limit}")
    A = a_matrix(config, pattern)
    value = hafnian(A, sym_tol=config.options.symmetry_tol,
                    threads=threads if threads is not None else config.options.threads)
    return p0 * abs(value) ** 2 / pattern.factorial()
