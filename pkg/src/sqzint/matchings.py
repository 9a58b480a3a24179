"""Pair partitions (perfect matchings) of {1..2n} and their cycle combinatorics.

A matching is stored as its canonical vector a = (a_1, ..., a_2n): the i-th
pair is (a_{2i-1}, a_{2i}) with a_{2i-1} < a_{2i}, and the odd entries
increase, so a_1 = 1.  There are (2n-1)!! matchings.  An ordered matching
keeps the order of the two elements inside each pair and sorts pairs by
their minimum; there are 2^n (2n-1)!! of them.

The cycle type of a matching (or of a pair of matchings relative to each
other) counts the alternating cycles of the union multigraph; a cycle with
2k edges counts as one k-cycle.  Cycle types drive the distinguishability
weights, so both the per-matching decomposition and the closed-form count of
matchings per cycle type live here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import ResourceLimitError, ValidationError

DEFAULT_MATCHING_LIMIT = 10


def double_factorial(k: int) -> int:
    """k!! for k >= -1 (with (-1)!! = 0!! = 1)."""
    if k < -1:
        raise ValidationError(f"double factorial undefined for {k}")
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def matching_count(n: int) -> int:
    """|M_2n| = (2n-1)!!."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    return double_factorial(2 * n - 1)


def ordered_matching_count(n: int) -> int:
    """2^n (2n-1)!!."""
    return (1 << n) * matching_count(n)


def mu_matching_count(mu: int, n: int) -> int:
    """Number of partitions of mu*n elements into n unordered mu-tuples.

    Equals (mu n)! / ((mu!)^n n!), evaluated exactly (Python integers do not
    overflow).  mu = 2 recovers (2n-1)!!.
    """
    if mu < 2 or n < 1:
        raise ValidationError("need mu >= 2 and n >= 1")
    num = math.factorial(mu * n)
    den = math.factorial(mu) ** n * math.factorial(n)
    count, rem = divmod(num, den)
    if rem:
        raise ArithmeticError("mu-matching count is not integral; internal error")
    return count


def is_matching_vector(vector: Sequence[int]) -> bool:
    """True iff ``vector`` is a canonical matching vector."""
    two_n = len(vector)
    if two_n == 0 or two_n % 2:
        return False
    if sorted(vector) != list(range(1, two_n + 1)):
        return False
    for i in range(0, two_n, 2):
        if vector[i] >= vector[i + 1]:
            return False
        if i + 2 < two_n and vector[i] >= vector[i + 2]:
            return False
    return True


def is_ordered_matching_vector(vector: Sequence[int]) -> bool:
    """True iff ``vector`` is an ordered-matching vector (pair minima increase)."""
    two_n = len(vector)
    if two_n == 0 or two_n % 2:
        return False
    if sorted(vector) != list(range(1, two_n + 1)):
        return False
    minima = [min(vector[i], vector[i + 1]) for i in range(0, two_n, 2)]
    return all(a < b for a, b in zip(minima, minima[1:]))


@dataclass(frozen=True)
class Matching:
    """Canonical pair partition of {1..2n}.

    The vector doubles as the one-line notation of the associated
    permutation: alpha(k) = vector[k-1].
    """

    vector: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", tuple(self.vector))
        if not is_matching_vector(self.vector):
            raise ValidationError(f"not a canonical matching vector: {self.vector}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Matching":
        vec: list[int] = []
        for a, b in sorted((min(p), max(p)) for p in pairs):
            vec.extend((a, b))
        return cls(tuple(vec))

    @classmethod
    def trivial(cls, n: int) -> "Matching":
        return cls(tuple(range(1, 2 * n + 1)))

    @property
    def n(self) -> int:
        return len(self.vector) // 2

    def pairs(self) -> tuple[tuple[int, int], ...]:
        v = self.vector
        return tuple((v[i], v[i + 1]) for i in range(0, len(v), 2))

    def as_permutation(self) -> tuple[int, ...]:
        return self.vector


@dataclass(frozen=True)
class OrderedMatching:
    """Pair partition with significant within-pair order."""

    vector: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", tuple(self.vector))
        if not is_ordered_matching_vector(self.vector):
            raise ValidationError(f"not an ordered matching vector: {self.vector}")

    @property
    def n(self) -> int:
        return len(self.vector) // 2

    def pairs(self) -> tuple[tuple[int, int], ...]:
        v = self.vector
        return tuple((v[i], v[i + 1]) for i in range(0, len(v), 2))

    def forget_order(self) -> Matching:
        return Matching.from_pairs(self.pairs())


def _check_limit(n: int, limit: int) -> None:
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n > limit:
        raise ResourceLimitError(
            f"matching enumeration guarded at n <= {limit}; got n = {n}")


def iter_matching_vectors(n: int, limit: int = DEFAULT_MATCHING_LIMIT) -> Iterator[tuple[int, ...]]:
    """Canonical matching vectors of {1..2n} in lexicographic order."""
    _check_limit(n, limit)

    def rec(free: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if not free:
            yield ()
            return
        first = free[0]
        rest = free[1:]
        for i, partner in enumerate(rest):
            head = (first, partner)
            for tail in rec(rest[:i] + rest[i + 1:]):
                yield head + tail

    return rec(tuple(range(1, 2 * n + 1)))


def enumerate_matchings(n: int, limit: int = DEFAULT_MATCHING_LIMIT) -> list[Matching]:
    """All (2n-1)!! matchings, lexicographically ordered by canonical vector."""
    return [Matching(v) for v in iter_matching_vectors(n, limit)]


def unrank_matching_vector(n: int, rank: int) -> tuple[int, ...]:
    """The ``rank``-th canonical vector in the lexicographic enumeration.

    Gives O(n^2) random access into the fixed enumeration order, so matching
    sums can be chunked across workers without shared iteration state.
    """
    total = matching_count(n)
    if not 0 <= rank < total:
        raise ValidationError(f"rank {rank} out of range [0, {total})")
    free = list(range(1, 2 * n + 1))
    vec: list[int] = []
    while free:
        block = matching_count(len(free) // 2 - 1)
        first = free.pop(0)
        choice, rank = divmod(rank, block)
        partner = free.pop(choice)
        vec.extend((first, partner))
    return tuple(vec)


def iter_ordered_matching_vectors(n: int, limit: int = DEFAULT_MATCHING_LIMIT) -> Iterator[tuple[int, ...]]:
    """Ordered-matching vectors: each matching with every within-pair order."""
    for base in iter_matching_vectors(n, limit):
        pairs = [(base[i], base[i + 1]) for i in range(0, len(base), 2)]
        for flips in range(1 << n):
            vec: list[int] = []
            for i, (a, b) in enumerate(pairs):
                if flips >> i & 1:
                    vec.extend((b, a))
                else:
                    vec.extend((a, b))
            yield tuple(vec)


def enumerate_ordered_matchings(n: int, limit: int = DEFAULT_MATCHING_LIMIT) -> list[OrderedMatching]:
    return [OrderedMatching(v) for v in iter_ordered_matching_vectors(n, limit)]


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------

def _check_permutation(sigma: Sequence[int]) -> tuple[int, ...]:
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(1, len(sigma) + 1)):
        raise ValidationError(f"not a permutation of 1..{len(sigma)}: {sigma}")
    return sigma


def compose(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """(sigma o tau)(k) = sigma(tau(k)), one-line notation."""
    sigma = _check_permutation(sigma)
    tau = _check_permutation(tau)
    if len(sigma) != len(tau):
        raise ValidationError("size mismatch")
    return tuple(sigma[t - 1] for t in tau)


def invert(sigma: Sequence[int]) -> tuple[int, ...]:
    sigma = _check_permutation(sigma)
    inv = [0] * len(sigma)
    for k, v in enumerate(sigma, start=1):
        inv[v - 1] = k
    return tuple(inv)


def project_permutation(sigma: Sequence[int]) -> Matching:
    """Canonical matching with pair set {{sigma(2i-1), sigma(2i)}}.

    Every sigma factors as a pair permutation times within-pair swaps times a
    matching; this returns that matching.  Matchings are fixed points, and
    each matching is hit by exactly 2^n n! permutations.
    """
    sigma = _check_permutation(sigma)
    if len(sigma) % 2:
        raise ValidationError("permutation must act on an even number of elements")
    return Matching.from_pairs(
        (sigma[i], sigma[i + 1]) for i in range(0, len(sigma), 2))


# ---------------------------------------------------------------------------
# cycle structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleType:
    """Counts (C_1, ..., C_n) of k-cycles, constrained by sum k*C_k = n."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(self.counts))
        if any(c < 0 for c in self.counts):
            raise ValidationError("cycle counts must be non-negative")
        n = len(self.counts)
        if sum(k * c for k, c in enumerate(self.counts, start=1)) != n:
            raise ValidationError(f"cycle counts {self.counts} do not satisfy sum k*C_k = n")

    @property
    def n(self) -> int:
        return len(self.counts)


def partner_map(vector: Sequence[int]) -> list[int]:
    """partner[x] = element paired with x (index 0 unused)."""
    partner = [0] * (len(vector) + 1)
    for i in range(0, len(vector), 2):
        a, b = vector[i], vector[i + 1]
        partner[a] = b
        partner[b] = a
    return partner


def relative_cycle_counts(partner_a: Sequence[int], partner_b: Sequence[int],
                          n: int) -> tuple[int, ...]:
    """Cycle counts of the alpha/beta union multigraph, from partner maps.

    Each component alternates alpha and beta edges; a component with 2k edges
    is one k-cycle.  Hot path: callers pre-build the partner maps.
    """
    visited = [False] * (2 * n + 1)
    counts = [0] * n
    for v in range(1, 2 * n + 1):
        if visited[v]:
            continue
        edges = 0
        cur = v
        use_a = True
        while True:
            visited[cur] = True
            cur = partner_a[cur] if use_a else partner_b[cur]
            visited[cur] = True
            edges += 1
            use_a = not use_a
            if cur == v and use_a:
                break
        counts[edges // 2 - 1] += 1
    return tuple(counts)


def relative_cycle_type(alpha: Matching, beta: Matching) -> CycleType:
    """Cycle type of beta relative to alpha (symmetric in its arguments)."""
    if alpha.n != beta.n:
        raise ValidationError("matchings have different sizes")
    return CycleType(relative_cycle_counts(
        partner_map(alpha.vector), partner_map(beta.vector), alpha.n))


def double_set_cycle_type(matching: Matching) -> CycleType:
    """Cycle type of a matching acting on the double set (1,1,2,2,...,n,n).

    This is the chain-the-pairs procedure: replace every element by the index
    of its trivial pair and decompose the resulting n-edge multigraph on n
    vertices into cycles.  Agrees with ``relative_cycle_type(trivial, m)``.
    """
    n = matching.n
    edges = [((a + 1) // 2, (b + 1) // 2) for a, b in matching.pairs()]
    incident: list[list[int]] = [[] for _ in range(n + 1)]
    for eid, (x, y) in enumerate(edges):
        incident[x].append(eid)
        incident[y].append(eid)
    used = [False] * n
    counts = [0] * n
    for start in range(n):
        if used[start]:
            continue
        length = 0
        eid = start
        cur = edges[start][0]
        while True:
            used[eid] = True
            length += 1
            x, y = edges[eid]
            cur = y if cur == x else x
            nxt = next((e for e in incident[cur] if not used[e]), None)
            if nxt is None:
                break
            eid = nxt
        counts[length - 1] += 1
    return CycleType(tuple(counts))


@lru_cache(maxsize=64)
def cycle_types(n: int) -> tuple[CycleType, ...]:
    """All cycle types with sum k*C_k = n (partitions of n as count vectors)."""
    result: list[CycleType] = []

    def rec(remaining: int, max_part: int, counts: list[int]) -> None:
        if remaining == 0:
            result.append(CycleType(tuple(counts)))
            return
        for k in range(min(remaining, max_part), 0, -1):
            counts[k - 1] += 1
            rec(remaining - k, k, counts)
            counts[k - 1] -= 1

    rec(n, n, [0] * n)
    return tuple(result)


def count_by_cycle_type(n: int, ctype: CycleType) -> int:
    """Number of matchings of {1..2n} with the given double-set cycle type.

    Exact value 2^n n! / prod_k C_k! (2k)^{C_k}.
    """
    if ctype.n != n:
        raise ValidationError("cycle type size does not match n")
    num = (1 << n) * math.factorial(n)
    den = 1
    for k, c in enumerate(ctype.counts, start=1):
        den *= math.factorial(c) * (2 * k) ** c
    count, rem = divmod(num, den)
    if rem:
        raise ArithmeticError("matching count by cycle type is not integral")
    return count


def permutation_count_by_cycle_type(n: int, ctype: CycleType) -> int:
    """Number of permutations in S_n with the given cycle type: n!/prod k^C_k C_k!."""
    if ctype.n != n:
        raise ValidationError("cycle type size does not match n")
    den = 1
    for k, c in enumerate(ctype.counts, start=1):
        den *= math.factorial(c) * k ** c
    count, rem = divmod(math.factorial(n), den)
    if rem:
        raise ArithmeticError("permutation count by cycle type is not integral")
    return count


def cycle_index_matchings(n: int, t: Sequence[float]) -> float:
    """Cycle index of matchings on the double set: sum over types of count * prod t_k^{C_k}."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if len(t) < n:
        raise ValidationError(f"need at least {n} parameters, got {len(t)}")
    total = 0.0
    for ctype in cycle_types(n):
        term = float(count_by_cycle_type(n, ctype))
        for k, c in enumerate(ctype.counts, start=1):
            if c:
                term *= t[k - 1] ** c
        total += term
    return total


def cycle_index_symmetric(n: int, t: Sequence[float]) -> float:
    """Cycle index of the symmetric group S_n at parameters t."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if len(t) < n:
        raise ValidationError(f"need at least {n} parameters, got {len(t)}")
    total = 0.0
    for ctype in cycle_types(n):
        term = float(permutation_count_by_cycle_type(n, ctype))
        for k, c in enumerate(ctype.counts, start=1):
            if c:
                term *= t[k - 1] ** c
        total += term
    return total
