"""
Command-line front end.

  cmsdisc envelope   majorant/minorant pair, coefficients and check verdict
  cmsdisc bound      discrepancy table for a measure file over an x0 grid
  cmsdisc wigner     random-matrix counting / moment / variance experiment
  cmsdisc witness    the sharpness witness measure and its report
  cmsdisc calibrate  empirical K1, K2, K3 over the deterministic corpora

Exit codes: 0 success, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import functools
import json
import logging
import math
from dataclasses import astuple, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import click
import numpy as np

from cmsdisc.chebyshev_core import ChebKind
from cmsdisc.cms_envelope import build_envelope, check_envelope, p0_minus_q0, sample_envelope
from cmsdisc.config import default_grid, load_defaults
from cmsdisc.errors import NUMERICAL_ERRORS, USAGE_ERRORS
from cmsdisc.et_bounds import calibrate_K, cms_bound_profile, et_bound_profile, max_exact_n0, rho
from cmsdisc.measures import (
    Domain,
    circle_corpus,
    circle_to_interval,
    load_measure,
    moments,
    save_measure,
    test_corpus,
    true_discrepancy,
    two_sided_discrepancy,
)
from cmsdisc.measures import sharpness_witness as build_witness
from cmsdisc.wigner import (
    CountRecord,
    EnsembleConfig,
    EntryModel,
    UMomentRecord,
    VarianceRecord,
    check_variance_trials,
    moment_limit,
    wigner_experiment,
)

log = logging.getLogger("cmsdisc")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_CALIBRATION_N0 = (2, 4, 8, 16, 32, 64)
KIND_CHOICE = click.Choice(["t", "u"], case_sensitive=False)


class CliFailure(click.ClickException):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def handles_errors(fn):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NUMERICAL_ERRORS as exc:
            log.error("numerical failure: %s", exc)
            raise CliFailure(str(exc), 3) from exc
        except USAGE_ERRORS as exc:
            raise CliFailure(str(exc), 2) from exc

    return wrapper


# ------------------------------------------------------
# Output helpers
# ------------------------------------------------------
def log_config(command: str, **params: Any) -> Dict[str, Any]:
    config = {"command": command, **{k: _jsonable(v) for k, v in params.items()}}
    log.info("config %s", json.dumps(config, sort_keys=True))
    return config


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_json(path: Optional[Path], data: Dict[str, Any]) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is None:
        click.echo(text, nl=False)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    log.info("wrote %s", path)


def write_records(path: Path, record_type: type, records: Iterable[Any]) -> None:
    write_csv(path, [f.name for f in fields(record_type)], (astuple(r) for r in records))


def sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}.{suffix}.json")


# ------------------------------------------------------
# Commands
# ------------------------------------------------------
@click.group()
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Also write the run log to this file.",
)
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def main(log_file: Optional[Path], verbose: bool) -> None:
    """Chebyshev-Markov-Stieltjes discrepancy bounds and Wigner-law checks."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


@main.command()
@click.option("--kind", type=KIND_CHOICE, required=True)
@click.option("--n0", type=click.IntRange(1, 64), required=True)
@click.option("--k0", type=click.IntRange(min=1), required=True)
@click.option("--samples", type=click.IntRange(min=2), default=101, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@handles_errors
def envelope(kind: str, n0: int, k0: int, samples: int, out: Optional[Path]) -> None:
    """Build the envelope at node k0 of S_n0 and report its coefficients."""
    config = log_config("envelope", kind=kind, n0=n0, k0=k0, samples=samples, out=out)
    env = build_envelope(ChebKind.parse(kind), n0, k0)
    check = check_envelope(env)
    write_json(
        out,
        {
            "config": config,
            "nodes": env.nodes.tolist(),
            "gauss_weights": env.gauss_weights.tolist(),
            "lambda_k0": env.weight,
            "p": env.p.tolist(),
            "q": env.q.tolist(),
            "p0_minus_q0": p0_minus_q0(env),
            "check": check._asdict(),
            "samples": [{"x": x, "p": p, "q": q} for x, p, q in sample_envelope(env, samples)],
        },
    )
    if not check.ok:
        log.warning("envelope check failed: %s", check._asdict())


@main.command()
@click.option(
    "--measure", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True
)
@click.option("--kind", type=KIND_CHOICE, required=True)
@click.option("--n0", type=click.IntRange(1, max_exact_n0()), required=True)
@click.option("--x0", type=float, default=None, help="Single point instead of the grid.")
@click.option("--K", "k_const", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@handles_errors
def bound(
    measure: Path, kind: str, n0: int, x0: Optional[float], k_const: Optional[float], out: Path
) -> None:
    """Tabulate true discrepancy, Erdos-Turan bound and the exact envelope bound."""
    config = log_config(
        "bound", measure=measure, kind=kind, n0=n0, x0=x0, k=k_const, out=out
    )
    cheb = ChebKind.parse(kind)
    mu = load_measure(measure)
    if mu.domain is Domain.CIRCLE:
        log.info("%s is a circle measure; using its cos-pushforward", measure)
        mu = circle_to_interval(mu)
    grid = default_grid() if x0 is None else np.array([x0])
    true = np.atleast_1d(two_sided_discrepancy(mu, cheb, grid))
    et = et_bound_profile(mu, cheb, n0, grid, k_const)
    exact = cms_bound_profile(mu, cheb, grid, n0)
    write_csv(
        out,
        ("x0", "true_discrepancy", "et_bound", "cms_exact_bound"),
        zip(grid.tolist(), true.tolist(), et.tolist(), exact.tolist()),
    )
    if k_const is None:
        k_const = load_defaults()["constants"]["k2" if cheb is ChebKind.FIRST else "k3"]
    write_json(sidecar(out, "config"), {**config, "k_used": k_const, "atoms": mu.size})


@main.command()
@click.option("--N", "n_dim", type=click.IntRange(1, 1000), required=True)
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True)
@click.option(
    "--ensemble",
    type=click.Choice([m.value for m in EntryModel]),
    default=EntryModel.COMPLEX_GAUSSIAN.value,
    show_default=True,
)
@click.option("--diag-var", type=click.FloatRange(min=0), default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--variance", is_flag=True, help="Also estimate count variances.")
@click.option("--n-max", type=click.IntRange(min=1), default=None)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@handles_errors
def wigner(
    n_dim: int,
    trials: int,
    ensemble: str,
    diag_var: Optional[float],
    seed: int,
    variance: bool,
    n_max: Optional[int],
    out: Path,
) -> None:
    """Monte-Carlo check of the semicircle-law counting estimate."""
    ens = EnsembleConfig(n_dim, EntryModel(ensemble), diag_var, seed)
    if n_max is None:
        n_max = max(1, moment_limit(n_dim) - int(load_defaults()["wigner"]["moment_slack"]))
    config = log_config(
        "wigner", trials=trials, variance=variance, n_max=n_max, out=out, **ens.as_dict()
    )
    if variance:
        check_variance_trials(trials)
    result = wigner_experiment(ens, default_grid(), n_max, trials)
    write_records(out / "counts.csv", CountRecord, result.counts)
    write_records(out / "u_moments.csv", UMomentRecord, result.u_moments)
    if variance:
        write_records(out / "variance.csv", VarianceRecord, result.variances())
    worst = max(r.ratio for r in result.counts)
    write_json(out / "config.json", {**config, "max_ratio": worst})
    click.echo(f"max error / bound ratio: {worst:.4f}")


@main.command()
@click.option("--n0", type=click.IntRange(min=1), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@handles_errors
def witness(n0: int, out: Path) -> None:
    """Write the sharpness witness measure and its discrepancy report."""
    config = log_config("witness", n0=n0, out=out)
    mu = build_witness(n0)
    save_measure(mu, out)
    u = moments(mu, ChebKind.SECOND, n0).values
    extreme = float(mu.positions[-1])
    at_extreme = float(two_sided_discrepancy(mu, ChebKind.SECOND, extreme))
    worst = true_discrepancy(mu, ChebKind.SECOND)
    reference = rho(extreme, n0) / n0
    write_json(
        sidecar(out, "report"),
        {
            "config": config,
            "atoms": [{"position": x, "weight": w} for x, w in mu.atoms()],
            "u_moments": u.tolist(),
            "max_abs_u_moment": float(np.max(np.abs(u), initial=0.0)),
            "extreme_node": extreme,
            "discrepancy_at_extreme": at_extreme,
            "rho_over_n0": reference,
            "sharpness_ratio": at_extreme / reference,
            "true_discrepancy": worst.value,
            "true_discrepancy_x0": worst.x0,
        },
    )


@main.command()
@click.option("--corpus-seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--n0", "n0_list", type=click.IntRange(min=1), multiple=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@handles_errors
def calibrate(corpus_seed: int, n0_list: Sequence[int], out: Optional[Path]) -> None:
    """Estimate K1, K2, K3 as worst-case ratios over the corpora."""
    n0_list = tuple(n0_list) or DEFAULT_CALIBRATION_N0
    config = log_config("calibrate", corpus_seed=corpus_seed, n0=n0_list, out=out)
    corpus = test_corpus(corpus_seed) + circle_corpus(corpus_seed)
    result = calibrate_K(corpus, n0_list)
    if not all(math.isfinite(v) for v in (result.k1, result.k2, result.k3)):
        log.warning("non-finite calibration constant: %s", result.as_dict())
    write_json(out, {"config": config, **result.as_dict()})
