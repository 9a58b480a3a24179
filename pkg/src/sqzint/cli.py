"""Command-line front end.

One subcommand per computation; JSON or CSV output with floats printed to 15
significant digits so regression diffs stay meaningful.  Exit codes: 0
success, 2 validation error, 3 resource guard, 4 tolerance/oracle failure,
64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from typing import Any, Sequence

import numpy as np

from . import distprob, hafnian, matchings, measure, oracle
from ._parallel import resolve_threads
from .errors import ResourceLimitError, ToleranceError, ValidationError
from .model import (ExperimentConfig, OutputPattern, SchmidtSpectrum, iter_patterns,
                    load_config, validate_unitary, vacuum_probability)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_TOLERANCE = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _round15(value: Any) -> Any:
    """Round floats to 15 significant digits, recursively."""
    if isinstance(value, float):
        return float(f"{value:.15g}")
    if isinstance(value, dict):
        return {k: _round15(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round15(v) for v in value]
    return value


def _emit(document: Any, args: argparse.Namespace, csv_rows: list[dict] | None = None) -> None:
    if args.format == "csv":
        if csv_rows is None:
            raise ValidationError("this command has no CSV form; use --format json")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0].keys()))
        writer.writeheader()
        for row in csv_rows:
            writer.writerow({k: (f"{v:.15g}" if isinstance(v, float) else v)
                             for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(_round15(document), indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_counts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_spectrum(text: str) -> SchmidtSpectrum:
    try:
        weights = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated weights, got {text!r}") from exc
    return SchmidtSpectrum(weights)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    if not args.config:
        raise ValidationError("this command needs --config")
    config = load_config(args.config)
    threads = resolve_threads(args.threads)
    return replace(config, options=replace(config.options, threads=threads))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args: argparse.Namespace) -> int:
    config = _config(args)
    report = validate_unitary(config.interferometer.matrix, config.options.unitarity_tol)
    _emit({"dim": report.dim, "max_deviation": report.max_deviation,
           "tol": report.tol, "passed": report.passed,
           "sources": len(config.sources)}, args)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_prob(args: argparse.Namespace) -> int:
    config = _config(args)
    pattern = OutputPattern(_parse_counts(args.pattern))
    route = args.route or distprob.probability_route(config)
    if route == "identical":
        value = distprob.probability_identical(config, pattern)
    elif route == "orthogonal":
        value = distprob.probability_orthogonal(config, pattern)
    elif route == "general":
        value = distprob.probability_general(config, pattern)
    else:
        raise ValidationError(f"unknown route {route!r}")
    doc = {"pattern": list(pattern.counts), "photons": pattern.total,
           "route": route, "probability": value}
    _emit(doc, args, csv_rows=[{"pattern": " ".join(map(str, pattern.counts)),
                                "probability": value, "photons": pattern.total}])
    return EXIT_OK


def _cmd_prob_all(args: argparse.Namespace) -> int:
    config = _config(args)
    photons = args.photons
    if photons < 0 or photons % 2:
        raise ValidationError("--photons must be a non-negative even number")
    route = distprob.probability_route(config)
    rows = []
    for pattern in iter_patterns(config.n_ports, photons):
        value = distprob.probability(config, pattern)
        rows.append({"pattern": " ".join(map(str, pattern.counts)),
                     "probability": value, "photons": photons})
    total = sum(row["probability"] for row in rows)
    doc = {"photons": photons, "route": route, "total": total,
           "rows": [{"pattern": [int(x) for x in r["pattern"].split()],
                     "probability": r["probability"]} for r in rows]}
    _emit(doc, args, csv_rows=rows)
    return EXIT_OK


def _cmd_ideal(args: argparse.Namespace) -> int:
    config = _config(args)
    pattern = OutputPattern(_parse_counts(args.pattern))
    value = hafnian.ideal_probability(config, pattern)
    _emit({"pattern": list(pattern.counts), "photons": pattern.total,
           "probability": value}, args,
          csv_rows=[{"pattern": " ".join(map(str, pattern.counts)),
                     "probability": value, "photons": pattern.total}])
    return EXIT_OK


def _cmd_q2n(args: argparse.Namespace) -> int:
    if args.spectrum:
        spectrum = _parse_spectrum(args.spectrum)
    else:
        config = _config(args)
        spectrum = config.shared_spectrum()
        if spectrum is None:
            raise ValidationError("config sources carry different spectra; pass --spectrum")
    value = measure.q2n(spectrum, args.n)
    _emit({"n": args.n, "photons": 2 * args.n, "q": value,
           "floor": measure.q2n_floor(args.n),
           "purity": spectrum.purity}, args)
    return EXIT_OK


def _cmd_photon_dist(args: argparse.Namespace) -> int:
    config = _config(args)
    dist_fn = (measure.ideal_photon_number_distribution if args.ideal
               else measure.photon_number_distribution)
    rows = []
    for n in range(args.max_pairs + 1):
        rows.append({"pairs": n, "photons": 2 * n,
                     "probability": dist_fn(config.sources, n)})
    total = sum(r["probability"] for r in rows)
    _emit({"ideal": args.ideal, "total": total, "rows": rows}, args, csv_rows=rows)
    return EXIT_OK


def _cmd_tvd_bound(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.spectrum:
        spectrum = _parse_spectrum(args.spectrum)
    else:
        spectrum = config.shared_spectrum()
        if spectrum is None:
            raise ValidationError("config sources carry different spectra; pass --spectrum")
    report = measure.build_report(config.sources, spectrum, max_pairs=args.max_pairs)
    _emit(report.to_dict(), args)
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    est = measure.two_mode_noise_estimate(args.purity, args.photons)
    _emit({"purity": est.purity, "photons": est.photons, "nbar": est.nbar,
           "epsilon": est.epsilon, "q_approx": est.q_approx,
           "q_exact": est.q_exact, "q_exact_floor": est.q_exact_floor,
           "q_exact_ceil": est.q_exact_ceil}, args)
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    if args.config:
        config = _config(args)
        cases = [oracle.RegressionCase(name="config", config=config,
                                       max_photons=args.photons)]
    else:
        cases = oracle.regression_corpus()
    rows = oracle.run_regression(cases, tolerance=args.tolerance)
    worst = max(rows, key=lambda r: r.difference)
    failed = [r for r in rows if r.difference > args.tolerance]
    doc = {"cases": len(cases), "patterns": len(rows),
           "tolerance": args.tolerance,
           "worst_difference": worst.difference,
           "worst_case": worst.case, "worst_pattern": list(worst.pattern),
           "failures": len(failed), "passed": not failed}
    csv_rows = [{"case": r.case, "pattern": " ".join(map(str, r.pattern)),
                 "route": r.route, "formula": r.formula, "oracle": r.oracle,
                 "difference": r.difference} for r in rows]
    _emit(doc, args, csv_rows=csv_rows)
    return EXIT_OK if not failed else EXIT_TOLERANCE


def _cmd_matchings_dump(args: argparse.Namespace) -> int:
    items = matchings.enumerate_matchings(args.n, limit=args.limit)
    doc = {"n": args.n, "count": len(items),
           "matchings": [[list(pair) for pair in m.pairs()] for m in items]}
    _emit(doc, args)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqzint",
                     description="Photon-counting statistics of multimode squeezed "
                                 "light on linear interferometers")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--output", help="write the result here instead of stdout")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SQZINT_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("validate", _cmd_validate, "check the config and its unitary")
    p.add_argument("--config", required=True)

    p = add("prob", _cmd_prob, "output probability of one pattern")
    p.add_argument("--config", required=True)
    p.add_argument("--pattern", required=True, help="comma-separated counts, e.g. 2,2")
    p.add_argument("--route", choices=("identical", "orthogonal", "general"))

    p = add("prob-all", _cmd_prob_all, "probabilities of every pattern at a photon number")
    p.add_argument("--config", required=True)
    p.add_argument("--photons", type=int, required=True)

    p = add("ideal", _cmd_ideal, "indistinguishable-case probability of one pattern")
    p.add_argument("--config", required=True)
    p.add_argument("--pattern", required=True)

    p = add("q2n", _cmd_q2n, "indistinguishability probability q_2n")
    p.add_argument("--spectrum", help="comma-separated weights, e.g. 0.5,0.5")
    p.add_argument("--config")
    p.add_argument("--n", type=int, required=True, help="number of photon pairs")

    p = add("photon-dist", _cmd_photon_dist, "photon-pair number distribution")
    p.add_argument("--config", required=True)
    p.add_argument("--max-pairs", type=int, default=8)
    p.add_argument("--ideal", action="store_true",
                   help="single-mode reference distribution instead of the real one")

    p = add("tvd-bound", _cmd_tvd_bound, "averaged measure and variation-distance bound")
    p.add_argument("--config", required=True)
    p.add_argument("--spectrum")
    p.add_argument("--max-pairs", type=int, default=16)

    p = add("estimate", _cmd_estimate, "two-mode-noise estimate from purity")
    p.add_argument("--purity", type=float, required=True)
    p.add_argument("--photons", type=float, required=True,
                   help="average detected photon number 2*nbar")

    p = add("oracle-check", _cmd_oracle_check, "compare formulas against the Fock oracle")
    p.add_argument("--config")
    p.add_argument("--photons", type=int, default=4,
                   help="pattern sizes to test when --config is given")
    p.add_argument("--tolerance", type=float, default=1e-9)

    p = add("matchings-dump", _cmd_matchings_dump, "dump pair partitions as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--limit", type=int, default=matchings.DEFAULT_MATCHING_LIMIT)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource guard: {exc}\n")
        return EXIT_RESOURCE
    except ToleranceError as exc:
        sys.stderr.write(f"tolerance failure: {exc}\n")
        return EXIT_TOLERANCE
    except FileNotFoundError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
