"""Command line interface: fit, detect, verify, and scaling.

fit quantizes a CSV dataset, runs the estimation pipelines, and writes a
JSON artifact holding the estimates, the classical reference fit, and the
training densities used for thresholding.  detect scores query rows against
a fit artifact.  verify runs the self-check suites.  scaling measures how
the magnitude error shrinks with shot count.

Exit codes: 0 success, 1 usage or I/O trouble, 2 bad or degenerate data,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (
    DataAccessError,
    DegenerateDataError,
    DomainError,
    FormatError,
    LayoutError,
    PostselectionImpossibleError,
    QgadError,
    ResourceError,
)
from .estimators import EstimationBudget, fit
from .fixedpoint import QuantizedDataset, quantize_dataset
from .gad import GaussianModel, allocate_epsilon_mu, classical_fit, detect, effective_kappa
from .rng import stream
from .statevector import DEFAULT_QUBIT_CAP
from .suites import (
    all_suites,
    comparator_suite,
    equivalence_suite,
    scaling_experiment,
    signtest_suite,
    transduction_suite,
)

SEED_ENV_VAR = "QGAD_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="qgad", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qgad {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p_fit = sub.add_parser("fit", help="estimate moments and write a fit artifact")
    p_fit.add_argument("--input", required=True, help="training CSV, one row per point")
    p_fit.add_argument("--bits", type=int, required=True, help="fixed-point magnitude bits")
    p_fit.add_argument("--backend", choices=("exact", "shots"), default="exact")
    p_fit.add_argument("--shots", type=int, default=10_000,
                       help="shots per magnitude campaign (shots backend)")
    p_fit.add_argument("--delta", type=float, default=0.05,
                       help="per-element wrong-sign probability budget")
    p_fit.add_argument("--epsilon", type=float, default=None,
                       help="target density error; derives --epsilon-mu from the data's conditioning")
    p_fit.add_argument("--epsilon-mu", type=float, default=None,
                       help="per-moment resolution; magnitudes below it report as zero (default 1e-3)")
    p_fit.add_argument("--seed", type=int, default=None,
                       help=f"random seed (default: ${SEED_ENV_VAR} or 0)")
    p_fit.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    p_fit.add_argument("--skip-header", action="store_true")
    p_fit.add_argument("--output", default=None, help="artifact path (default stdout)")
    p_fit.set_defaults(func=cmd_fit)

    p_det = sub.add_parser("detect", help="score query rows against a fit artifact")
    p_det.add_argument("--model", required=True, help="fit artifact JSON")
    p_det.add_argument("--input", required=True, help="query CSV")
    p_det.add_argument("--threshold", type=float, default=None,
                       help="density threshold; rows strictly below are anomalies")
    p_det.add_argument("--quantile", type=float, default=None,
                       help="threshold at this percentile of training densities (default 1.0)")
    p_det.add_argument("--skip-header", action="store_true")
    p_det.add_argument("--output", default=None, help="verdicts path (default stdout)")
    p_det.set_defaults(func=cmd_detect)

    p_ver = sub.add_parser("verify", help="run the self-check suites")
    p_ver.add_argument("--suite", default="all",
                       choices=("comparator", "transduction", "signtest", "equivalence", "all"))
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_sca = sub.add_parser("scaling", help="measure magnitude RMSE against shot count")
    p_sca.add_argument("--input", default=None,
                       help="training CSV (default: a built-in synthetic dataset)")
    p_sca.add_argument("--bits", type=int, default=4)
    p_sca.add_argument("--shots-grid", default="100,1000,10000,100000,1000000",
                       help="comma-separated shot counts")
    p_sca.add_argument("--repeats", type=int, default=50)
    p_sca.add_argument("--seed", type=int, default=None)
    p_sca.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    p_sca.add_argument("--skip-header", action="store_true")
    p_sca.add_argument("--output", default=None, help="CSV path (default stdout)")
    p_sca.set_defaults(func=cmd_scaling)
    return parser


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None


def read_matrix(path: str, skip_header: bool = False) -> np.ndarray:
    """Parse a CSV of decimal reals into an (M, D) array.

    Blank lines are ignored; ragged rows and non-numeric cells raise
    FormatError naming the line and column.
    """
    rows: list[list[float]] = []
    width = None
    pending_header = skip_header
    with open(path, newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if pending_header:
                pending_header = False
                continue
            values = []
            for colno, cell in enumerate(row, start=1):
                text = cell.strip()
                try:
                    values.append(float(text))
                except ValueError:
                    raise FormatError(
                        f"line {lineno}, column {colno}: not a number: {text!r}"
                    ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FormatError(
                    f"line {lineno}: expected {width} columns, found {len(values)}"
                )
            rows.append(values)
    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    return np.array(rows, dtype=np.float64)


def ingest(path: str, bits: int, skip_header: bool = False) -> tuple[QuantizedDataset, dict]:
    """Read and quantize a training CSV, reporting shape and clamped cells."""
    grid = read_matrix(path, skip_header)
    if grid.shape[0] < 2:
        raise DegenerateDataError(
            f"training data needs at least 2 rows, got {grid.shape[0]}"
        )
    dataset = quantize_dataset(grid, bits)
    report = {
        "rows": dataset.num_rows,
        "features": dataset.num_features,
        "bits": bits,
        "index_qubits": dataset.index_qubits,
        "clamped_cells": [list(cell) for cell in dataset.clamped],
    }
    return dataset, report


def _emit(text: str, output: str | None) -> None:
    if output is None:
        print(text)
    else:
        with open(output, "w") as handle:
            handle.write(text + "\n")


def _config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def cmd_fit(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.epsilon is not None and args.epsilon_mu is not None:
        raise _UsageError("--epsilon and --epsilon-mu are mutually exclusive")
    dataset, ingest_report = ingest(args.input, args.bits, args.skip_header)
    classical = classical_fit(dataset)
    if args.epsilon is not None:
        kappa = effective_kappa(classical)
        epsilon_mu = allocate_epsilon_mu(args.epsilon, dataset.num_features, kappa)
        epsilon_mu = min(epsilon_mu, 1.0 - 1e-12)
    else:
        epsilon_mu = args.epsilon_mu if args.epsilon_mu is not None else 1e-3
    budget = EstimationBudget(
        mode=args.backend,
        shots_magnitude=args.shots,
        delta=args.delta,
        epsilon_mu=epsilon_mu,
        seed=seed,
        qubit_cap=args.qubit_cap,
    )
    report = fit(dataset, budget)
    estimated = GaussianModel(report.mu_hat, report.cov_hat)
    positive_definite = not estimated.is_degenerate
    decoded = dataset.decoded()
    training_densities = (
        np.asarray(estimated.density(decoded)).tolist() if positive_definite else None
    )
    classical_densities = (
        np.asarray(classical.density(decoded)).tolist()
        if not classical.is_degenerate
        else None
    )
    config = {
        "command": "fit",
        "input": args.input,
        "bits": args.bits,
        "backend": args.backend,
        "shots": args.shots,
        "delta": args.delta,
        "epsilon": args.epsilon,
        "epsilon_mu": epsilon_mu,
        "seed": seed,
        "qubit_cap": args.qubit_cap,
        "skip_header": bool(args.skip_header),
    }
    deltas = {
        "max_abs_mu": float(np.max(np.abs(report.mu_hat - classical.mu))),
        "max_abs_cov": float(np.max(np.abs(report.cov_hat - classical.cov))),
    }
    artifact = {
        "kind": "qgad-fit",
        "version": __version__,
        "config": config,
        "config_hash": _config_hash(config),
        "ingest": ingest_report,
        "estimate": dict(report.to_dict(), positive_definite=positive_definite),
        "classical": {
            "mu": classical.mu.tolist(),
            "cov": classical.cov.tolist(),
            "degenerate": classical.is_degenerate,
            "densities": classical_densities,
        },
        "training_densities": training_densities,
        "deltas": deltas,
    }
    _emit(json.dumps(artifact, indent=2, sort_keys=True), args.output)
    print(
        f"fit: {dataset.num_rows} rows x {dataset.num_features} features at "
        f"{args.bits} bits, backend={args.backend}, "
        f"max |mu - classical| = {deltas['max_abs_mu']:.3e}, "
        f"max |cov - classical| = {deltas['max_abs_cov']:.3e}",
        file=sys.stderr,
    )
    if not positive_definite:
        print(
            "warning: estimated covariance is not positive definite; "
            "detect will refuse this artifact",
            file=sys.stderr,
        )
    return 0


def _load_artifact(path: str) -> dict:
    with open(path) as handle:
        try:
            artifact = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(artifact, dict) or artifact.get("kind") != "qgad-fit":
        raise FormatError(f"{path}: not a fit artifact")
    return artifact


def cmd_detect(args) -> int:
    if args.threshold is not None and args.quantile is not None:
        raise _UsageError("--threshold and --quantile are mutually exclusive")
    artifact = _load_artifact(args.model)
    estimate = artifact["estimate"]
    if not estimate.get("positive_definite", False):
        raise DegenerateDataError(
            "artifact's estimated covariance is not positive definite; "
            "refit before detecting"
        )
    model = GaussianModel(
        np.array(estimate["mu_hat"]), np.array(estimate["cov_hat"])
    )
    queries = read_matrix(args.input, args.skip_header)
    if queries.size and queries.shape[1] != model.dim:
        raise DomainError(
            f"query rows have {queries.shape[1]} features, model has {model.dim}"
        )
    if args.threshold is not None:
        sigma = args.threshold
        if sigma < 0.0:
            raise DomainError(f"threshold must be non-negative, got {sigma}")
        policy = {"threshold": sigma, "quantile": None}
    else:
        quantile = args.quantile if args.quantile is not None else 1.0
        if not 0.0 <= quantile <= 100.0:
            raise DomainError(f"quantile must be in [0, 100], got {quantile}")
        densities = artifact.get("training_densities")
        if not densities:
            raise DegenerateDataError(
                "artifact has no training densities; pass --threshold"
            )
        sigma = float(np.percentile(np.asarray(densities), quantile))
        policy = {"threshold": None, "quantile": quantile}
    rows = []
    anomalies = 0
    for point in np.atleast_2d(queries) if queries.size else []:
        verdict = detect(model, point, sigma)
        rows.append({"density": float(model.density(point)), "anomaly": verdict})
        anomalies += int(verdict)
    result = {
        "kind": "qgad-detect",
        "version": __version__,
        "model": args.model,
        "threshold": sigma,
        "policy": policy,
        "rows": rows,
        "summary": {"rows": len(rows), "anomalies": anomalies},
    }
    _emit(json.dumps(result, indent=2, sort_keys=True), args.output)
    print(
        f"detect: {len(rows)} rows, {anomalies} anomalies at sigma = {sigma:.6e}",
        file=sys.stderr,
    )
    return 0


def cmd_verify(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.suite == "all":
        results = all_suites(seed)
    else:
        factory = {
            "comparator": lambda: comparator_suite(seed=seed + 7),
            "transduction": lambda: transduction_suite(seed=seed + 11),
            "signtest": lambda: signtest_suite(seed=seed + 13),
            "equivalence": lambda: equivalence_suite(seed=seed + 17),
        }[args.suite]
        results = [factory()]
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: {result.detail}")
        failed += 0 if result.passed else 1
    return 0 if failed == 0 else 3


def _synthetic_dataset(seed: int, bits: int) -> QuantizedDataset:
    rng = stream(seed, "scaling-dataset")
    raw = rng.normal(loc=(0.35, -0.2), scale=0.15, size=(32, 2))
    return quantize_dataset(np.clip(raw, -0.95, 0.95), bits)


def cmd_scaling(args) -> int:
    seed = _resolve_seed(args.seed)
    try:
        grid = [int(part) for part in args.shots_grid.split(",") if part.strip()]
    except ValueError:
        raise _UsageError(f"bad --shots-grid: {args.shots_grid!r}") from None
    if len(grid) < 3:
        raise _UsageError("--shots-grid needs at least 3 points")
    if min(grid) < 1:
        raise _UsageError("shot counts must be positive")
    if max(grid) / min(grid) < 100:
        raise _UsageError("--shots-grid must span at least two decades")
    if args.repeats < 20:
        raise _UsageError("--repeats must be at least 20")
    if args.input is not None:
        dataset, _ = ingest(args.input, args.bits, args.skip_header)
    else:
        dataset = _synthetic_dataset(seed, args.bits)
    rows, slopes = scaling_experiment(dataset, grid, args.repeats, seed, args.qubit_cap)
    lines = ["shots,feature,rmse,slope"]
    for row in rows:
        lines.append(
            f"{row.shots},{row.feature},{row.rmse!r},{slopes[row.feature]!r}"
        )
    _emit("\n".join(lines), args.output)
    for feature, slope in sorted(slopes.items()):
        print(f"scaling: feature {feature} log-log slope = {slope:.3f}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except (
        DomainError,
        LayoutError,
        DegenerateDataError,
        DataAccessError,
        ResourceError,
        PostselectionImpossibleError,
        QgadError,
    ) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
