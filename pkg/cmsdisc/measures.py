"""
measures: finite atomic probability measures on the line and the circle.

Moments against T_n / U_n, circle Fourier coefficients, the circle-to-
interval pushforward, exact tail masses and discrepancies against sigma_1 /
sigma_2, the sharpness witness, and the deterministic test corpora.

Measure file format (UTF-8 CSV):
  position,weight   -> line measure
  theta,weight      -> circle measure (radians)
Weights are normalised on load.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Tuple, Union

import numpy as np

from cmsdisc.chebyshev_core import (
    ArrayLike,
    ChebKind,
    cheb_vander,
    cheb_zeros,
    gauss_rule,
    sigma_tail,
)
from cmsdisc.errors import (
    IndexOutOfRange,
    InsufficientMoments,
    KindMismatch,
    MeasureFormatError,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
WEIGHT_SUM_TOL = 1e-12
NORMALIZE_WARN_TOL = 1e-6
PUSHFORWARD_DECIMALS = 15


class Domain(str, enum.Enum):
    LINE = "line"
    CIRCLE = "circle"


class MomentKind(str, enum.Enum):
    T = "t"
    U = "u"
    FOURIER = "fourier"

    @classmethod
    def for_cheb(cls, kind: Union[ChebKind, str]) -> "MomentKind":
        return cls.T if ChebKind.parse(kind) is ChebKind.FIRST else cls.U

    @property
    def cheb_kind(self) -> ChebKind:
        if self is MomentKind.FOURIER:
            raise KindMismatch("Fourier coefficients have no Chebyshev kind")
        return ChebKind.FIRST if self is MomentKind.T else ChebKind.SECOND


# -----------------------------
# Types
# -----------------------------
@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """
    Atoms sorted by position with duplicates merged; weights sum to 1.

    Circle positions are angles reduced to [0, 2 pi).
    """

    positions: np.ndarray
    weights: np.ndarray
    domain: Domain = Domain.LINE
    label: str = field(default="", compare=False)

    def __post_init__(self):
        domain = Domain(self.domain)
        pos = np.asarray(self.positions, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pos.shape != w.shape:
            raise MeasureFormatError(
                f"{len(pos)} positions but {len(w)} weights"
            )
        if pos.size == 0:
            raise MeasureFormatError("a measure needs at least one atom")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise MeasureFormatError("positions and weights must be finite")
        if np.any(w < 0):
            raise MeasureFormatError("weights must be nonnegative")
        keep = w > 0
        pos, w = pos[keep], w[keep]
        if pos.size == 0:
            raise MeasureFormatError("all weights are zero")
        if domain is Domain.CIRCLE:
            pos = np.mod(pos, TWO_PI)
            pos[pos >= TWO_PI] = 0.0
        uniq, inverse = np.unique(pos, return_inverse=True)
        merged = np.bincount(inverse.reshape(-1), weights=w, minlength=len(uniq))
        total = float(merged.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise MeasureFormatError(f"weights sum to {total!r}, expected 1")
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "positions", uniq)
        object.__setattr__(self, "weights", merged)

    @classmethod
    def normalized(
        cls, positions, weights, domain: Domain = Domain.LINE, label: str = ""
    ) -> "DiscreteMeasure":
        w = np.asarray(weights, dtype=float)
        total = float(w.sum())
        if not total > 0:
            raise MeasureFormatError(f"weights must have positive sum, got {total!r}")
        return cls(positions, w / total, domain, label)

    @classmethod
    def point_mass(cls, position: float, domain: Domain = Domain.LINE):
        return cls([position], [1.0], domain, label=f"delta({position:g})")

    @property
    def size(self) -> int:
        return len(self.positions)

    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.positions.tolist(), self.weights.tolist()))


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """values[n - 1] holds the n-th moment, n = 1..n_max."""

    kind: MomentKind
    values: np.ndarray

    def __post_init__(self):
        kind = MomentKind(self.kind)
        dtype = complex if kind is MomentKind.FOURIER else float
        vals = np.array(self.values, dtype=dtype).reshape(-1)
        vals.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, kind: MomentKind, n_max: int) -> "MomentSequence":
        return cls(kind, np.zeros(n_max))

    @property
    def n_max(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def at(self, n: int):
        """The n-th moment (1-based)."""
        if n < 1:
            raise IndexOutOfRange(f"moment index must be >= 1, got {n}")
        return self.upto(n)[n - 1]

    def upto(self, n: int) -> np.ndarray:
        if n > len(self.values):
            raise InsufficientMoments(
                f"need {self.kind.value}-moments up to n={n}, have {len(self.values)}"
            )
        return self.values[:n]

    def require(self, kind: MomentKind) -> "MomentSequence":
        if self.kind is not kind:
            raise KindMismatch(
                f"expected {kind.value} moments, got {self.kind.value} moments"
            )
        return self


class Discrepancy(NamedTuple):
    value: float
    x0: float


class ArcDiscrepancy(NamedTuple):
    value: float
    start: float
    end: float


# -----------------------------
# Moments
# -----------------------------
def _require_domain(mu: DiscreteMeasure, domain: Domain) -> None:
    if mu.domain is not domain:
        raise MeasureFormatError(f"expected a {domain.value} measure, got {mu.domain.value}")


def moments(
    mu: DiscreteMeasure, kind: Union[MomentKind, ChebKind, str], n_max: int
) -> MomentSequence:
    """eps_n = int S_n d mu for n = 1..n_max (T or U family)."""
    _require_domain(mu, Domain.LINE)
    mkind = kind if isinstance(kind, MomentKind) else MomentKind.for_cheb(kind)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    v = cheb_vander(mkind.cheb_kind, mu.positions, n_max)
    return MomentSequence(mkind, mu.weights @ v[:, 1:])


def fourier(nu: DiscreteMeasure, n_max: int) -> MomentSequence:
    """nu_hat(n) = int exp(-i n theta) d nu for n = 1..n_max."""
    _require_domain(nu, Domain.CIRCLE)
    n = np.arange(1, n_max + 1)
    phases = np.exp(-1j * np.outer(n, nu.positions))
    return MomentSequence(MomentKind.FOURIER, phases @ nu.weights)


def circle_to_interval(nu: DiscreteMeasure, arc_center: float = 0.0) -> DiscreteMeasure:
    """Rotate the arc centre to 0 and push forward by x = cos(theta)."""
    _require_domain(nu, Domain.CIRCLE)
    label = f"cos-pushforward({nu.label})" if nu.label else ""
    # snap to 1e-15 so cos(theta) and cos(-theta) land on one atom
    x = np.round(np.cos(nu.positions - arc_center), PUSHFORWARD_DECIMALS) + 0.0
    return DiscreteMeasure(x, nu.weights, Domain.LINE, label)


# -----------------------------
# Tails and discrepancies
# -----------------------------
def _suffix_mass(mu: DiscreteMeasure) -> np.ndarray:
    # suffix[i] = sum_{j >= i} w_j, suffix[size] = 0
    return np.concatenate([np.cumsum(mu.weights[::-1])[::-1], [0.0]])


def tail(mu: DiscreteMeasure, x0: ArrayLike) -> ArrayLike:
    """mu[x0, +inf)."""
    _require_domain(mu, Domain.LINE)
    out = _suffix_mass(mu)[np.searchsorted(mu.positions, x0, side="left")]
    return float(out) if np.ndim(out) == 0 else out


def open_tail(mu: DiscreteMeasure, x0: ArrayLike) -> ArrayLike:
    """mu(x0, +inf)."""
    _require_domain(mu, Domain.LINE)
    out = _suffix_mass(mu)[np.searchsorted(mu.positions, x0, side="right")]
    return float(out) if np.ndim(out) == 0 else out


def discrepancy_at(mu: DiscreteMeasure, kind: ChebKind, x0: ArrayLike) -> ArrayLike:
    """|mu[x0, +inf) - sigma[x0, +inf)|."""
    diff = np.abs(np.asarray(tail(mu, x0)) - np.asarray(sigma_tail(kind, x0)))
    return float(diff) if np.ndim(diff) == 0 else diff


def two_sided_discrepancy(mu: DiscreteMeasure, kind: ChebKind, x0: ArrayLike) -> ArrayLike:
    """max over the closed and open tail conventions at x0."""
    s = np.asarray(sigma_tail(kind, x0))
    closed = np.abs(np.asarray(tail(mu, x0)) - s)
    opened = np.abs(np.asarray(open_tail(mu, x0)) - s)
    out = np.maximum(closed, opened)
    return float(out) if np.ndim(out) == 0 else out


def true_discrepancy(mu: DiscreteMeasure, kind: ChebKind) -> Discrepancy:
    """
    sup over x0 of |mu tail - sigma tail|, both tail conventions.

    Between atoms the mu tail is constant and sigma's is monotone, so the
    supremum is a one-sided limit at some atom.
    """
    d = np.asarray(two_sided_discrepancy(mu, kind, mu.positions)).reshape(-1)
    i = int(np.argmax(d))
    return Discrepancy(float(d[i]), float(mu.positions[i]))


def arc_discrepancy(nu: DiscreteMeasure) -> ArcDiscrepancy:
    """sup over arcs A of |nu(A) - mes A / (2 pi)|, open and closed arcs."""
    _require_domain(nu, Domain.CIRCLE)
    frac = nu.positions / TWO_PI
    upto = np.cumsum(nu.weights)
    before = upto - nu.weights
    # centred distribution function at both one-sided limits, plus F(0-) = 0
    points = np.concatenate([[0.0], frac, frac])
    values = np.concatenate([[0.0], upto - frac, before - frac])
    hi, lo = int(np.argmax(values)), int(np.argmin(values))
    return ArcDiscrepancy(
        float(values[hi] - values[lo]),
        float(points[lo] * TWO_PI),
        float(points[hi] * TWO_PI),
    )


# -----------------------------
# Named measures
# -----------------------------
def gauss_measure(kind: ChebKind, m: int) -> DiscreteMeasure:
    """The m-node Gauss rule of sigma_1 / sigma_2 as a measure."""
    rule = gauss_rule(kind, m)
    return DiscreteMeasure(rule.nodes, rule.weights, label=f"gauss-{rule.kind.value}-{m}")


def chebyshev_zero_measure(m: int) -> DiscreteMeasure:
    """Uniform measure on the zeros of T_m."""
    return DiscreteMeasure(cheb_zeros(ChebKind.FIRST, m), np.full(m, 1.0 / m), label=f"t-zeros-{m}")


def roots_of_unity(k: int, rotation: float = 0.0) -> DiscreteMeasure:
    theta = rotation + TWO_PI * np.arange(k) / k
    return DiscreteMeasure(theta, np.full(k, 1.0 / k), Domain.CIRCLE, label=f"roots-of-unity-{k}")


def sharpness_witness(n0: int) -> DiscreteMeasure:
    """
    Gauss measure of sigma_2 on n0 + 1 nodes.

    Its U-moments vanish for 1 <= n <= 2 n0 + 1, yet the mass jump at each
    node is the Gauss weight there.
    """
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    mu = gauss_measure(ChebKind.SECOND, n0 + 1)
    return DiscreteMeasure(mu.positions, mu.weights, label=f"witness-{n0}")


# -----------------------------
# Corpora
# -----------------------------
RANDOM_LINE_MEASURES = 100
RANDOM_CIRCLE_MEASURES = 40
MAX_RANDOM_ATOMS = 40
PUSHFORWARD_ROOTS = (2, 3, 5, 8)


def _random_atoms(rng: np.random.Generator, low: float, high: float):
    size = int(rng.integers(1, MAX_RANDOM_ATOMS + 1))
    pos = rng.uniform(low, high, size)
    w = rng.dirichlet(np.ones(size))
    return pos, w / w.sum()


def test_corpus(seed: int = 0) -> List[DiscreteMeasure]:
    """
    Deterministic line measures for the property suites.

    100 random measures (atoms in [-1.5, 1.5], flat-Dirichlet weights)
    followed by the named families.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(RANDOM_LINE_MEASURES):
        pos, w = _random_atoms(rng, -1.5, 1.5)
        corpus.append(DiscreteMeasure.normalized(pos, w, label=f"random-{seed}-{i}"))
    corpus += [DiscreteMeasure.point_mass(x) for x in (0.0, -2.0, 0.5, 1.0)]
    corpus += [chebyshev_zero_measure(m) for m in (3, 8, 32)]
    corpus += [gauss_measure(ChebKind.SECOND, m) for m in (1, 4, 16)]
    corpus += [sharpness_witness(n0) for n0 in (2, 8)]
    for k in PUSHFORWARD_ROOTS:
        pushed = circle_to_interval(roots_of_unity(k))
        corpus.append(DiscreteMeasure(pushed.positions, pushed.weights, label=f"pushforward-roots-{k}"))
    return corpus


# pytest would otherwise try to collect the corpus builder as a test
test_corpus.__test__ = False


def circle_corpus(seed: int = 0) -> List[DiscreteMeasure]:
    """Deterministic circle measures for the circle inequality."""
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(RANDOM_CIRCLE_MEASURES):
        pos, w = _random_atoms(rng, 0.0, TWO_PI)
        corpus.append(
            DiscreteMeasure.normalized(pos, w, Domain.CIRCLE, label=f"random-circle-{seed}-{i}")
        )
    corpus += [roots_of_unity(k) for k in (2, 3, 5, 8, 16)]
    corpus += [roots_of_unity(k, rotation=0.3) for k in (4, 7)]
    corpus.append(DiscreteMeasure.point_mass(0.0, Domain.CIRCLE))
    corpus.append(DiscreteMeasure([0.0, math.pi], [0.5, 0.5], Domain.CIRCLE, label="antipodal"))
    return corpus


# -----------------------------
# Files
# -----------------------------
HEADERS = {Domain.LINE: ("position", "weight"), Domain.CIRCLE: ("theta", "weight")}


def load_measure(path: Union[str, Path]) -> DiscreteMeasure:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise MeasureFormatError(f"{path}: cannot read measure file ({exc})") from exc
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise MeasureFormatError(f"{path}: empty measure file")
    header = tuple(cell.strip().lower() for cell in rows[0])
    domain = next((d for d, h in HEADERS.items() if h == header), None)
    if domain is None:
        raise MeasureFormatError(
            f"{path}: header must be 'position,weight' or 'theta,weight', got {','.join(rows[0])!r}"
        )
    try:
        data = np.array([[float(a), float(b)] for a, b in (r[:2] for r in rows[1:])], dtype=float)
    except (ValueError, TypeError) as exc:
        raise MeasureFormatError(f"{path}: bad numeric row ({exc})") from exc
    if data.size == 0:
        raise MeasureFormatError(f"{path}: no atoms")
    total = float(data[:, 1].sum())
    if abs(total - 1.0) > NORMALIZE_WARN_TOL:
        log.warning("%s: weights sum to %.12g; normalising", path, total)
    try:
        return DiscreteMeasure.normalized(data[:, 0], data[:, 1], domain, label=path.stem)
    except MeasureFormatError as exc:
        raise MeasureFormatError(f"{path}: {exc}") from exc


def save_measure(mu: DiscreteMeasure, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADERS[mu.domain])
        for x, w in mu.atoms():
            writer.writerow([repr(x), repr(w)])
    return path
