"""
wigner: Monte-Carlo checks of the semicircle-law error estimate.

Random Hermitian matrices A with independent upper-triangle entries, a
symmetric entry law and E|A_uv|^2 = 1 off the diagonal. The empirical
measure of lambda_k / (2 sqrt N) is compared against sigma_2:

  |E #{k : lambda_k > 2 sqrt(N) x0} - N sigma_2(x0, inf)| <= C max(N^(2/3)(1 - |x0|), 1)

Each trial draws from its own Philox stream keyed by (seed, trial index), so
results do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh_tridiagonal, get_lapack_funcs

from cmsdisc.chebyshev_core import ChebKind, cheb_vander, sigma_tail
from cmsdisc.config import load_defaults, thread_count
from cmsdisc.errors import ConfigError, IndexOutOfRange, NoConvergence

log = logging.getLogger(__name__)

T = TypeVar("T")

SQRT_HALF = math.sqrt(0.5)
TRACE_TOL = 1e-8


class EntryModel(str, enum.Enum):
    COMPLEX_GAUSSIAN = "complex_gaussian"
    COMPLEX_RADEMACHER = "complex_rademacher"
    REAL_GAUSSIAN = "real_gaussian"
    REAL_RADEMACHER = "real_rademacher"

    @property
    def is_complex(self) -> bool:
        return self.value.startswith("complex")

    @property
    def is_gaussian(self) -> bool:
        return self.value.endswith("gaussian")


def _wigner_defaults() -> dict:
    return load_defaults()["wigner"]


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    entry_model: EntryModel
    diag_variance: Optional[float] = None  # None: per-model default
    seed: int = 0

    def __post_init__(self):
        try:
            model = EntryModel(self.entry_model)
        except ValueError:
            choices = ", ".join(m.value for m in EntryModel)
            raise ConfigError(
                f"unknown entry model {self.entry_model!r} (expected one of {choices})"
            ) from None
        object.__setattr__(self, "entry_model", model)
        max_n = int(_wigner_defaults()["max_n"])
        if not 1 <= self.n <= max_n:
            raise IndexOutOfRange(f"N must lie in 1..{max_n}, got {self.n}")
        if self.diag_variance is None:
            dv = float(_wigner_defaults()["diag_variance"][model.value])
            object.__setattr__(self, "diag_variance", dv)
        if not (math.isfinite(self.diag_variance) and self.diag_variance >= 0):
            raise ConfigError(f"diag_variance must be >= 0, got {self.diag_variance!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def as_dict(self) -> dict:
        out = asdict(self)
        out["entry_model"] = self.entry_model.value
        return out


@dataclass(frozen=True, eq=False)
class SpectrumSample:
    eigenvalues: np.ndarray  # ascending
    scaled_positions: np.ndarray  # eigenvalues / (2 sqrt N)
    trace: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def trace_error(self) -> float:
        return abs(math.fsum(self.eigenvalues) - self.trace)


@dataclass(frozen=True)
class CountRecord:
    x0: float
    mean_count: float
    expected_count: float
    error: float
    bound_term: float
    variance: float
    ratio: float
    deviation_frequency: float


@dataclass(frozen=True)
class UMomentRecord:
    n: int
    u_moment_mean: float
    std_err: float


@dataclass(frozen=True)
class VarianceRecord:
    x0: float
    variance: float
    reference: float  # max(N^(2/3)(1 - |x0|), 1)^(5/2)
    ratio: float


@dataclass(frozen=True)
class ExperimentResult:
    config: EnsembleConfig
    trials: int
    counts: List[CountRecord] = field(default_factory=list)
    u_moments: List[UMomentRecord] = field(default_factory=list)

    def variances(self) -> List[VarianceRecord]:
        """Count variances against max(N^(2/3)(1 - |x0|), 1)^(5/2)."""
        out = []
        for r in self.counts:
            reference = r.bound_term**2.5
            out.append(VarianceRecord(r.x0, r.variance, reference, r.variance / reference))
        return out


# -----------------------------
# Sampling
# -----------------------------
def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for one trial."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
    )


def _signs(rng: np.random.Generator, size: int) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=size) - 1.0


def draw_entries(model: EntryModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Off-diagonal entries: symmetric law, E|a|^2 = 1."""
    model = EntryModel(model)
    if model is EntryModel.COMPLEX_GAUSSIAN:
        re, im = rng.standard_normal(size), rng.standard_normal(size)
        return SQRT_HALF * (re + 1j * im)
    if model is EntryModel.COMPLEX_RADEMACHER:
        re, im = _signs(rng, size), _signs(rng, size)
        return SQRT_HALF * (re + 1j * im)
    if model is EntryModel.REAL_GAUSSIAN:
        return rng.standard_normal(size)
    return _signs(rng, size)


def _draw_diagonal(config: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    base = rng.standard_normal(config.n) if config.entry_model.is_gaussian else _signs(rng, config.n)
    return math.sqrt(config.diag_variance) * base


def sample_matrix(config: EnsembleConfig, trial: int = 0) -> np.ndarray:
    rng = trial_generator(config.seed, trial)
    n = config.n
    upper = np.triu_indices(n, 1)
    off = draw_entries(config.entry_model, rng, len(upper[0]))
    diag = _draw_diagonal(config, rng)
    h = np.zeros((n, n), dtype=complex if config.entry_model.is_complex else float)
    h[upper] = off
    h[upper[1], upper[0]] = np.conj(off)
    h[np.diag_indices(n)] = diag
    return h


# -----------------------------
# Spectra
# -----------------------------
def _check_hermitian(h: np.ndarray) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = float(np.max(np.abs(h), initial=0.0))
    if not np.allclose(h, h.conj().T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise ValueError("matrix is not Hermitian")


def eigenvalues(h: np.ndarray) -> np.ndarray:
    """
    All eigenvalues of a Hermitian matrix, ascending.

    Householder reduction to real symmetric tridiagonal form (LAPACK
    ?hetrd / ?sytrd) followed by the root-free implicit QL/QR iteration
    (?sterf); no eigenvectors are formed.
    """
    h = np.asarray(h)
    _check_hermitian(h)
    n = h.shape[0]
    if n == 1:
        return np.array([float(np.real(h[0, 0]))])
    a = np.ascontiguousarray(h, dtype=complex if np.iscomplexobj(h) else float)
    names = ("hetrd", "hetrd_lwork") if np.iscomplexobj(a) else ("sytrd", "sytrd_lwork")
    trd, trd_lwork = get_lapack_funcs(names, (a,))
    work, info = trd_lwork(n)
    if info != 0:
        raise NoConvergence(f"{trd.typecode}{names[0]} workspace query failed (info={info})")
    _, d, e, _, info = trd(a, lwork=int(np.real(work)))
    if info != 0:
        raise NoConvergence(f"tridiagonal reduction failed (info={info})")
    try:
        return eigvalsh_tridiagonal(d, e, lapack_driver="sterf")
    except LinAlgError as exc:
        raise NoConvergence(f"tridiagonal QR iteration did not converge: {exc}") from exc


def sample_spectrum(config: EnsembleConfig, trial: int = 0) -> SpectrumSample:
    h = sample_matrix(config, trial)
    lam = eigenvalues(h)
    sample = SpectrumSample(lam, lam / (2.0 * math.sqrt(config.n)), float(np.real(np.trace(h))))
    if sample.trace_error() > TRACE_TOL * config.n:
        raise NoConvergence(
            f"trial {trial}: eigenvalue sum misses the trace by {sample.trace_error():.3e}"
        )
    log.debug("trial %d: N=%d spectrum [%.4f, %.4f]", trial, config.n, lam[0], lam[-1])
    return sample


def run_trials(
    config: EnsembleConfig, trials: int, fn: Callable[[SpectrumSample], T]
) -> List[T]:
    """fn applied to each trial's spectrum, in trial order."""
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    workers = min(thread_count(), trials)

    def task(t: int) -> T:
        return fn(sample_spectrum(config, t))

    if workers == 1:
        return [task(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(trials)))


# -----------------------------
# Experiments
# -----------------------------
def moment_limit(n: int) -> int:
    """ceil(N^(1/3)) plus the configured slack."""
    root = round(n ** (1.0 / 3.0))
    while root**3 < n:
        root += 1
    while root > 1 and (root - 1) ** 3 >= n:
        root -= 1
    return root + int(_wigner_defaults()["moment_slack"])


def bound_term(n: int, x0) -> np.ndarray:
    """max(N^(2/3)(1 - |x0|), 1)."""
    return np.maximum(n ** (2.0 / 3.0) * (1.0 - np.abs(np.asarray(x0, dtype=float))), 1.0)


def _u_moments(sample: SpectrumSample, n_max: int) -> np.ndarray:
    return cheb_vander(ChebKind.SECOND, sample.scaled_positions, n_max)[:, 1:].mean(axis=0)


def _counts(sample: SpectrumSample, thresholds: np.ndarray) -> np.ndarray:
    return sample.n - np.searchsorted(sample.eigenvalues, thresholds, side="right")


def _std_err(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] < 2:
        return np.zeros(rows.shape[1])
    return rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])


def _check_moment_order(config: EnsembleConfig, n_max: int) -> None:
    limit = moment_limit(config.n)
    if not 1 <= n_max <= limit:
        raise IndexOutOfRange(f"n_max must lie in 1..{limit} for N={config.n}, got {n_max}")


def check_variance_trials(trials: int) -> None:
    minimum = int(_wigner_defaults()["min_variance_trials"])
    if trials < minimum:
        raise ConfigError(f"variance estimates need at least {minimum} trials, got {trials}")


def _thresholds(config: EnsembleConfig, x0_grid: Sequence[float]):
    grid = np.asarray(x0_grid, dtype=float).reshape(-1)
    return grid, 2.0 * math.sqrt(config.n) * grid


def _u_moment_records(rows: np.ndarray) -> List[UMomentRecord]:
    means, errs = rows.mean(axis=0), _std_err(rows)
    return [UMomentRecord(n, float(means[n - 1]), float(errs[n - 1])) for n in range(1, len(means) + 1)]


def _count_records(config: EnsembleConfig, grid: np.ndarray, counts: np.ndarray) -> List[CountRecord]:
    trials = counts.shape[0]
    expected = config.n * np.asarray(sigma_tail(ChebKind.SECOND, grid)).reshape(-1)
    mean = counts.mean(axis=0)
    var = counts.var(axis=0, ddof=1) if trials >= 2 else np.zeros(len(grid))
    term = bound_term(config.n, grid)
    error = np.abs(mean - expected)
    deviation = (np.abs(counts - expected) > term).mean(axis=0)
    return [
        CountRecord(
            x0=float(grid[j]),
            mean_count=float(mean[j]),
            expected_count=float(expected[j]),
            error=float(error[j]),
            bound_term=float(term[j]),
            variance=float(var[j]),
            ratio=float(error[j] / term[j]),
            deviation_frequency=float(deviation[j]),
        )
        for j in range(len(grid))
    ]


def u_moment_experiment(config: EnsembleConfig, n_max: int, trials: int) -> List[UMomentRecord]:
    """Mean and standard error of int U_n d mu_A, n = 1..n_max."""
    _check_moment_order(config, n_max)
    log.info("u-moment experiment N=%d n_max=%d trials=%d", config.n, n_max, trials)
    rows = np.array(run_trials(config, trials, lambda s: _u_moments(s, n_max)))
    return _u_moment_records(rows)


def counting_experiment(
    config: EnsembleConfig, x0_grid: Sequence[float], trials: int
) -> ExperimentResult:
    log.info("counting experiment N=%d trials=%d points=%d", config.n, trials, len(x0_grid))
    grid, thresholds = _thresholds(config, x0_grid)
    counts = np.array(run_trials(config, trials, lambda s: _counts(s, thresholds)), dtype=float)
    return ExperimentResult(config, trials, counts=_count_records(config, grid, counts))


def wigner_experiment(
    config: EnsembleConfig, x0_grid: Sequence[float], n_max: int, trials: int
) -> ExperimentResult:
    """Counts and U-moments from one pass over the trials."""
    _check_moment_order(config, n_max)
    log.info(
        "wigner experiment N=%d n_max=%d trials=%d points=%d",
        config.n,
        n_max,
        trials,
        len(x0_grid),
    )
    grid, thresholds = _thresholds(config, x0_grid)
    pairs = run_trials(config, trials, lambda s: (_counts(s, thresholds), _u_moments(s, n_max)))
    counts = np.array([c for c, _ in pairs], dtype=float)
    rows = np.array([u for _, u in pairs])
    return ExperimentResult(
        config,
        trials,
        counts=_count_records(config, grid, counts),
        u_moments=_u_moment_records(rows),
    )


def variance_experiment(
    config: EnsembleConfig, x0_grid: Sequence[float], trials: int
) -> List[VarianceRecord]:
    """Sample variance of the half-line count against the 5/2-power curve."""
    check_variance_trials(trials)
    return counting_experiment(config, x0_grid, trials).variances()
