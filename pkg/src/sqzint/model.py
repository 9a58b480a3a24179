"""Domain types: Schmidt spectra, squeezed sources, interferometers, patterns.

Conventions used throughout the package:

* Port indices are 0-based in Python code and 1-based in the JSON config
  format (converted at the boundary).
* A degenerate source occupies one input port; a non-degenerate source
  occupies two distinct ports, one per polarization, and its photon pairs
  split across them.
* Internal (Schmidt) modes are identified by integers in one global
  orthonormal basis, so overlaps between modes of different sources are
  exactly 0 or 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .errors import ValidationError

NORMALIZATION_TOL = 1e-12
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Normalized singular-value weights of a squeezed source.

    ``weights[j]`` is the probability carried by the Schmidt mode whose
    identity in the global internal-mode basis is ``basis[j]``.
    """

    weights: tuple[float, ...]
    basis: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        basis = tuple(int(b) for b in self.basis) if self.basis else tuple(range(len(weights)))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "basis", basis)
        if not weights:
            raise ValidationError("spectrum needs at least one mode")
        if len(basis) != len(weights):
            raise ValidationError("weights and basis have different lengths")
        if len(set(basis)) != len(basis):
            raise ValidationError("basis indices must be pairwise distinct")
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be non-negative")
        if any(b < 0 for b in basis):
            raise ValidationError("basis indices must be non-negative")
        total = math.fsum(weights)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"weights sum to {total!r}, not 1 within {NORMALIZATION_TOL}")

    @classmethod
    def single_mode(cls, basis_index: int = 0) -> "SchmidtSpectrum":
        return cls((1.0,), (basis_index,))

    @classmethod
    def two_mode(cls, epsilon: float, basis: tuple[int, int] = (0, 1)) -> "SchmidtSpectrum":
        """Dominant-mode-plus-noise spectrum (1 - eps, eps)."""
        if not 0.0 <= epsilon < 1.0:
            raise ValidationError("epsilon must be in [0, 1)")
        if epsilon == 0.0:
            return cls.single_mode(basis[0])
        return cls((1.0 - epsilon, epsilon), basis)

    @classmethod
    def uniform(cls, modes: int, first_basis_index: int = 0) -> "SchmidtSpectrum":
        return cls(tuple(1.0 / modes for _ in range(modes)),
                   tuple(range(first_basis_index, first_basis_index + modes)))

    @property
    def n_modes(self) -> int:
        return len(self.weights)

    @property
    def purity(self) -> float:
        return math.fsum(w * w for w in self.weights)

    @property
    def schmidt_number(self) -> float:
        return 1.0 / self.purity

    def moment(self, k: int) -> float:
        """M_k = sum_j p_j^k (M_1 = 1 for a normalized spectrum)."""
        return math.fsum(w ** k for w in self.weights)

    def moments(self, k_max: int) -> tuple[float, ...]:
        """(M_1, M_2, ..., M_{k_max})."""
        return tuple(self.moment(k) for k in range(1, k_max + 1))

    def relabel(self, mapping: dict[int, int]) -> "SchmidtSpectrum":
        return replace(self, basis=tuple(mapping.get(b, b) for b in self.basis))


Kind = Literal["degenerate", "non-degenerate"]


@dataclass(frozen=True)
class SqueezedSource:
    """One squeezed vacuum source feeding the interferometer.

    ``r`` is the overall squeezing amplitude (r = tanh of the usual squeezing
    parameter), strictly inside (0, 1).  A non-degenerate source carries a
    second port and, optionally, a separate spectrum for the second
    polarization; the singular values of both polarizations coincide, only
    the mode identities may differ.
    """

    r: float
    spectrum: SchmidtSpectrum
    port: int
    kind: Kind = "degenerate"
    port2: int | None = None
    psi_spectrum: SchmidtSpectrum | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.r < 1.0:
            raise ValidationError(f"squeezing amplitude must satisfy 0 < r < 1, got {self.r}")
        if self.port < 0:
            raise ValidationError("port must be non-negative")
        if self.kind not in ("degenerate", "non-degenerate"):
            raise ValidationError(f"unknown source kind {self.kind!r}")
        if self.kind == "degenerate":
            if self.port2 is not None or self.psi_spectrum is not None:
                raise ValidationError("degenerate sources use a single port and spectrum")
        else:
            if self.port2 is None:
                raise ValidationError("non-degenerate sources need a second port")
            if self.port2 == self.port:
                raise ValidationError("non-degenerate source ports must differ")
            psi = self.psi_spectrum
            if psi is not None and psi.weights != self.spectrum.weights:
                raise ValidationError(
                    "both polarizations share one set of singular values; "
                    "psi_spectrum may differ only in basis indices")

    @property
    def ports(self) -> tuple[int, ...]:
        if self.kind == "degenerate":
            return (self.port,)
        return (self.port, self.port2)  # type: ignore[arg-type]

    @property
    def psi(self) -> SchmidtSpectrum:
        """Second-polarization spectrum (equals ``spectrum`` when not set)."""
        return self.psi_spectrum if self.psi_spectrum is not None else self.spectrum

    def pair_terms(self) -> tuple[tuple[int, int, float], ...]:
        """Schmidt expansion of one photon pair: (label_1, label_2, weight)."""
        phi = self.spectrum
        psi = self.psi
        return tuple((phi.basis[j], psi.basis[j], phi.weights[j])
                     for j in range(phi.n_modes))

    def pair_ports(self) -> tuple[int, int]:
        """Input ports of the two photons of one pair (equal when degenerate)."""
        if self.kind == "degenerate":
            return (self.port, self.port)
        return (self.port, self.port2)  # type: ignore[return-value]

    def internal_labels(self) -> frozenset[int]:
        return frozenset(self.spectrum.basis) | frozenset(self.psi.basis)

    def vacuum_factor(self) -> float:
        """This source's contribution to the zero-photon probability.

        Squared normalization of the source state: exponent 1/2 per Schmidt
        mode for a degenerate source, 1 for a non-degenerate one.
        """
        exponent = 0.5 if self.kind == "degenerate" else 1.0
        return float(np.prod([(1.0 - self.r ** 2 * w) ** exponent
                              for w in self.spectrum.weights]))


@dataclass(frozen=True)
class UnitarityReport:
    dim: int
    max_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def validate_unitary(matrix: np.ndarray, tol: float = UNITARITY_TOL) -> UnitarityReport:
    """Max-norm deviation of U†U from the identity, with pass/fail vs ``tol``."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {matrix.shape}")
    gram = matrix.conj().T @ matrix
    deviation = float(np.max(np.abs(gram - np.eye(matrix.shape[0]))))
    return UnitarityReport(dim=matrix.shape[0], max_deviation=deviation, tol=tol)


class Interferometer:
    """M-port linear interferometer given by a unitary matrix U.

    U[k, l] is the amplitude taking input port k to output port l (ports
    0-based).  Construction validates unitarity.
    """

    def __init__(self, matrix: np.ndarray, tol: float = UNITARITY_TOL):
        report = validate_unitary(matrix, tol)
        if not report.passed:
            raise ValidationError(
                f"matrix is not unitary: max deviation {report.max_deviation:.3e} > {tol:.1e}")
        mat = np.array(matrix, dtype=complex)
        mat.setflags(write=False)
        self._matrix = mat

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Interferometer":
        return cls(np.eye(dim))

    @classmethod
    def beamsplitter(cls, u: float | None = None) -> "Interferometer":
        """Two-port beamsplitter [[u, v], [-v, u]], balanced by default."""
        if u is None:
            u = 1.0 / math.sqrt(2.0)
        if not 0.0 <= u <= 1.0:
            raise ValidationError("beamsplitter amplitude must be in [0, 1]")
        v = math.sqrt(1.0 - u * u)
        return cls(np.array([[u, v], [-v, u]]))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Interferometer) and np.array_equal(self._matrix, other._matrix)

    def __repr__(self) -> str:
        return f"Interferometer(dim={self.dim})"


@dataclass(frozen=True)
class OutputPattern:
    """Occupation vector m over the M output ports."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise ValidationError("pattern needs at least one port")
        if any(c < 0 for c in counts):
            raise ValidationError("occupation numbers must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def is_even(self) -> bool:
        return self.total % 2 == 0

    @property
    def n_pairs(self) -> int:
        if not self.is_even:
            raise ValidationError("odd photon number has no pair count")
        return self.total // 2

    def port_multiset(self) -> tuple[int, ...]:
        """Sorted 0-based output port of each photon (length |m|)."""
        return tuple(port for port, c in enumerate(self.counts) for _ in range(c))

    def factorial(self) -> int:
        """m! = prod_l m_l!."""
        out = 1
        for c in self.counts:
            out *= math.factorial(c)
        return out


def iter_patterns(n_ports: int, photons: int) -> Iterator[OutputPattern]:
    """All patterns over ``n_ports`` ports with exactly ``photons`` photons."""
    if n_ports < 1:
        raise ValidationError("need at least one port")

    def rec(port: int, left: int, acc: list[int]) -> Iterator[OutputPattern]:
        if port == n_ports - 1:
            yield OutputPattern(tuple(acc + [left]))
            return
        for c in range(left + 1):
            yield from rec(port + 1, left - c, acc + [c])

    return rec(0, photons, [])


@dataclass(frozen=True)
class SimulationOptions:
    """Tolerances, guards and parallelism hints."""

    unitarity_tol: float = UNITARITY_TOL
    symmetry_tol: float = 1e-10
    photon_cutoff: int = 8           # max photons in matching-sum probabilities
    matching_limit: int = 10         # max n for matching enumeration
    bruteforce_limit: int = 6        # max photons in the S_2n brute-force route
    oracle_pair_cutoff: int = 3      # max photon pairs kept by the Fock oracle
    threads: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Interferometer plus sources plus options; validated on construction."""

    interferometer: Interferometer
    sources: tuple[SqueezedSource, ...]
    options: SimulationOptions = field(default_factory=SimulationOptions)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise ValidationError("config needs at least one source")
        dim = self.interferometer.dim
        occupied: list[int] = []
        for src in self.sources:
            for port in src.ports:
                if not 0 <= port < dim:
                    raise ValidationError(f"source port {port} outside 0..{dim - 1}")
                occupied.append(port)
        if len(set(occupied)) != len(occupied):
            raise ValidationError("every source port must be distinct")

    @property
    def n_ports(self) -> int:
        return self.interferometer.dim

    def shared_spectrum(self) -> SchmidtSpectrum | None:
        """The common spectrum if all sources carry identical internal states."""
        first = self.sources[0].spectrum
        for src in self.sources:
            for spec in (src.spectrum, src.psi):
                if spec.weights != first.weights or spec.basis != first.basis:
                    return None
        return first

    def spectra_disjoint(self) -> bool:
        """True iff internal-mode label sets of distinct sources do not meet."""
        seen: set[int] = set()
        for src in self.sources:
            labels = src.internal_labels()
            if labels & seen:
                return False
            seen |= labels
        return True


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def reduced_matrix(interferometer: Interferometer, pattern: OutputPattern) -> np.ndarray:
    """M x 2n matrix built by taking column l_i of U for each detected photon."""
    if len(pattern.counts) != interferometer.dim:
        raise ValidationError("pattern length does not match interferometer size")
    if pattern.total == 0:
        raise ValidationError("vacuum pattern has no reduced matrix")
    if not pattern.is_even:
        raise ValidationError("odd photon numbers do not occur; no reduced matrix")
    cols = pattern.port_multiset()
    return interferometer.matrix[:, list(cols)].copy()


def a_matrix(config: ExperimentConfig, pattern: OutputPattern) -> np.ndarray:
    """The 2n x 2n symmetric pair-amplitude matrix for ``pattern``.

    Degenerate source at port q adds r U[q, l_i] U[q, l_j]; a non-degenerate
    source at ports (q1, q2) adds the symmetrized cross term
    r (U[q1, l_i] U[q2, l_j] + U[q2, l_i] U[q1, l_j]).  Entries are computed
    once per unordered index pair, so the result is symmetric to the bit.
    """
    if len(pattern.counts) != config.n_ports:
        raise ValidationError("pattern length does not match interferometer size")
    if not pattern.is_even or pattern.total == 0:
        raise ValidationError("A matrix requires an even, positive photon number")
    U = config.interferometer.matrix
    cols = pattern.port_multiset()
    two_n = len(cols)
    A = np.zeros((two_n, two_n), dtype=complex)
    for i in range(two_n):
        for j in range(i, two_n):
            entry = 0j
            for src in config.sources:
                q1, q2 = src.pair_ports()
                if q1 == q2:
                    entry += src.r * U[q1, cols[i]] * U[q1, cols[j]]
                else:
                    entry += src.r * (U[q1, cols[i]] * U[q2, cols[j]]
                                      + U[q2, cols[i]] * U[q1, cols[j]])
            A[i, j] = entry
            A[j, i] = entry
    return A


def vacuum_probability(config: ExperimentConfig,
                       spectrum: SchmidtSpectrum | None = None) -> float:
    """Probability of detecting zero photons.

    Independent of the interferometer.  ``spectrum`` overrides every
    source's spectrum (used when a common spectrum is imposed externally).
    """
    p0 = 1.0
    for src in config.sources:
        if spectrum is not None:
            src = replace(src, spectrum=spectrum,
                          psi_spectrum=None if src.psi_spectrum is None else spectrum)
        p0 *= src.vacuum_factor()
    if not 0.0 < p0 <= 1.0:
        raise ValidationError(f"vacuum probability {p0} outside (0, 1]")
    return p0


# ---------------------------------------------------------------------------
# JSON config format
# ---------------------------------------------------------------------------
# {"interferometer": {"re": [[...]], "im": [[...]]},
#  "sources": [{"port": 1, "r": 0.5, "kind": "degenerate",
#               "spectrum": {"weights": [...], "basis": [...]}}, ...],
#  "options": {...}}
# Ports are 1-based here.  Non-degenerate sources give "port": [k, l] and
# either one spectrum (both polarizations) or a list of two.

def _spectrum_from_dict(data: dict) -> SchmidtSpectrum:
    try:
        weights = data["weights"]
    except KeyError as exc:
        raise ValidationError("spectrum needs a 'weights' field") from exc
    return SchmidtSpectrum(tuple(weights), tuple(data.get("basis", ())))


def _spectrum_to_dict(spec: SchmidtSpectrum) -> dict:
    return {"weights": list(spec.weights), "basis": list(spec.basis)}


def _source_from_dict(data: dict) -> SqueezedSource:
    kind = data.get("kind", "degenerate")
    port = data.get("port")
    spec_data = data.get("spectrum")
    if port is None or "r" not in data or spec_data is None:
        raise ValidationError("source needs 'port', 'r' and 'spectrum' fields")
    if kind == "degenerate":
        if isinstance(port, list):
            raise ValidationError("degenerate sources take a single port")
        return SqueezedSource(r=float(data["r"]), spectrum=_spectrum_from_dict(spec_data),
                              port=int(port) - 1)
    if not isinstance(port, list) or len(port) != 2:
        raise ValidationError("non-degenerate sources take a port pair [k, l]")
    if isinstance(spec_data, list):
        if len(spec_data) != 2:
            raise ValidationError("spectrum list must hold exactly two spectra")
        phi = _spectrum_from_dict(spec_data[0])
        psi = _spectrum_from_dict(spec_data[1])
    else:
        phi = _spectrum_from_dict(spec_data)
        psi = None
    return SqueezedSource(r=float(data["r"]), spectrum=phi, port=int(port[0]) - 1,
                          kind="non-degenerate", port2=int(port[1]) - 1, psi_spectrum=psi)


def _source_to_dict(src: SqueezedSource) -> dict:
    if src.kind == "degenerate":
        return {"port": src.port + 1, "r": src.r, "kind": src.kind,
                "spectrum": _spectrum_to_dict(src.spectrum)}
    spectrum: object = _spectrum_to_dict(src.spectrum)
    if src.psi_spectrum is not None:
        spectrum = [spectrum, _spectrum_to_dict(src.psi_spectrum)]
    return {"port": [src.port + 1, src.port2 + 1], "r": src.r, "kind": src.kind,
            "spectrum": spectrum}


_OPTION_FIELDS = ("unitarity_tol", "symmetry_tol", "photon_cutoff", "matching_limit",
                  "bruteforce_limit", "oracle_pair_cutoff", "threads")


def config_from_json(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "interferometer" not in data or "sources" not in data:
        raise ValidationError("config needs 'interferometer' and 'sources' fields")
    itf = data["interferometer"]
    re_part = np.asarray(itf.get("re"), dtype=float)
    if re_part.ndim != 2:
        raise ValidationError("interferometer 're' must be a matrix")
    im_part = np.asarray(itf["im"], dtype=float) if "im" in itf else np.zeros_like(re_part)
    if im_part.shape != re_part.shape:
        raise ValidationError("'re' and 'im' must have matching shapes")
    opts_data = data.get("options", {})
    unknown = set(opts_data) - set(_OPTION_FIELDS)
    if unknown:
        raise ValidationError(f"unknown option fields: {sorted(unknown)}")
    options = SimulationOptions(**opts_data)
    interferometer = Interferometer(re_part + 1j * im_part, tol=options.unitarity_tol)
    sources = tuple(_source_from_dict(s) for s in data["sources"])
    return ExperimentConfig(interferometer=interferometer, sources=sources, options=options)


def config_to_json(config: ExperimentConfig, indent: int | None = 2) -> str:
    U = config.interferometer.matrix
    data = {
        "interferometer": {"re": U.real.tolist(), "im": U.imag.tolist()},
        "sources": [_source_to_dict(s) for s in config.sources],
        "options": {name: getattr(config.options, name) for name in _OPTION_FIELDS},
    }
    return json.dumps(data, indent=indent)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(fh.read())
