"""
et_bounds: Erdos-Turan type inequalities and the exact envelope bound.

  circle:        |nu(A) - mes A / 2pi|        <= K1 (1/n0 + sum |nu_hat(n)| / n)
  interval, T:   |mu[x0, inf) - s1[x0, inf)|  <= K2 (1/n0 + sum |eps_n^T| / n)
  interval, U:   |mu[x0, inf) - s2[x0, inf)|  <= K3 (rho/n0 + rho^(1/2) sum |eps_n^U| / n)

with rho(x; n0) = max(1 - |x|, n0^-2). cms_bound_at needs no constant: it
evaluates the majorant/minorant bound at the zeros of S_m0 adjacent to x0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from cmsdisc.chebyshev_core import ArrayLike, ChebKind, cheb_zeros, sigma_tail
from cmsdisc.cms_envelope import bound_terms, build_envelope
from cmsdisc.config import default_grid, load_defaults
from cmsdisc.errors import IndexOutOfRange
from cmsdisc.measures import (
    DiscreteMeasure,
    Domain,
    MomentKind,
    MomentSequence,
    arc_discrepancy,
    fourier,
    moments,
    true_discrepancy,
    two_sided_discrepancy,
)

log = logging.getLogger(__name__)

MomentSource = Union[DiscreteMeasure, MomentSequence]


@dataclass(frozen=True)
class BoundReport:
    """bound_value = k_used * (leading + sum(terms))."""

    bound_value: float
    leading: float
    terms: Tuple[float, ...]
    n0: int
    x0: Optional[float]
    k_used: float

    def as_dict(self) -> dict:
        return {
            "bound_value": self.bound_value,
            "leading": self.leading,
            "terms": list(self.terms),
            "n0": self.n0,
            "x0": self.x0,
            "k_used": self.k_used,
        }


def _report(leading: float, terms: np.ndarray, n0: int, x0, k: float) -> BoundReport:
    terms = tuple(float(t) for t in terms)
    return BoundReport(k * (float(leading) + math.fsum(terms)), float(leading), terms, n0, x0, k)


def _constant(k: Optional[float], name: str) -> float:
    if k is None:
        return float(load_defaults()["constants"][name])
    if k <= 0:
        raise ValueError(f"K must be positive, got {k}")
    return float(k)


def _check_n0(n0: int) -> None:
    if n0 < 1:
        raise IndexOutOfRange(f"n0 must be >= 1, got {n0}")


def rho(x: ArrayLike, n0: int) -> ArrayLike:
    """max(1 - |x|, n0^-2)."""
    _check_n0(n0)
    out = np.maximum(1.0 - np.abs(np.asarray(x, dtype=float)), float(n0) ** -2)
    return float(out) if np.ndim(out) == 0 else out


def _harmonic_terms(seq: MomentSequence, kind: MomentKind, n0: int) -> np.ndarray:
    vals = np.abs(seq.require(kind).upto(n0))
    return vals / np.arange(1, n0 + 1)


def et_circle(coeffs: MomentSequence, n0: int, k: Optional[float] = None) -> BoundReport:
    _check_n0(n0)
    k = _constant(k, "k1")
    return _report(1.0 / n0, _harmonic_terms(coeffs, MomentKind.FOURIER, n0), n0, None, k)


def et_interval_t(tmoments: MomentSequence, n0: int, k: Optional[float] = None) -> BoundReport:
    _check_n0(n0)
    k = _constant(k, "k2")
    return _report(1.0 / n0, _harmonic_terms(tmoments, MomentKind.T, n0), n0, None, k)


def et_interval_u(
    umoments: MomentSequence, n0: int, x0: float, k: Optional[float] = None
) -> BoundReport:
    _check_n0(n0)
    k = _constant(k, "k3")
    r = rho(x0, n0)
    terms = math.sqrt(r) * _harmonic_terms(umoments, MomentKind.U, n0)
    return _report(r / n0, terms, n0, float(x0), k)


def et_bound_profile(
    source: MomentSource,
    kind: ChebKind,
    n0: int,
    x0_grid: ArrayLike,
    k: Optional[float] = None,
) -> np.ndarray:
    """The T- or U-form bound at every x0 of the grid."""
    kind = ChebKind.parse(kind)
    grid = np.atleast_1d(np.asarray(x0_grid, dtype=float))
    seq = _moments_of(source, kind, n0)
    if kind is ChebKind.FIRST:
        return np.full(grid.shape, et_interval_t(seq, n0, k).bound_value)
    k = _constant(k, "k3")
    harmonic = math.fsum(_harmonic_terms(seq, MomentKind.U, n0))
    r = np.asarray(rho(grid, n0))
    return k * (r / n0 + np.sqrt(r) * harmonic)


# -----------------------------
# Exact bound at arbitrary x0
# -----------------------------
def max_exact_n0() -> int:
    """Largest n0 whose adjacent order stays within the envelope limit."""
    return 2 * int(load_defaults()["envelope"]["max_n0"]) - 2


def adjacent_order(n0: int) -> int:
    """m0 = ceil(n0 / 2) + 1."""
    _check_n0(n0)
    limit = max_exact_n0()
    if n0 > limit:
        raise IndexOutOfRange(f"n0 must lie in 1..{limit} for the exact bound, got {n0}")
    return (n0 + 1) // 2 + 1


def _moments_of(source: MomentSource, kind: ChebKind, order: int) -> MomentSequence:
    if isinstance(source, DiscreteMeasure):
        return moments(source, kind, order)
    return source.require(MomentKind.for_cheb(kind))


def cms_bound_at(source: MomentSource, kind: ChebKind, x0: float, n0: int) -> BoundReport:
    """
    Rigorous bound on |mu[x0, inf) - sigma[x0, inf)| (and the open tail).

    For zeros z_lo <= x0 < z_hi of S_m0,
      mu[x0, inf) <= mu(z_lo, inf) <= sigma[z_lo, inf) + d(z_lo)
      mu(x0, inf) >= mu[z_hi, inf) >= sigma[z_hi, inf) - d(z_hi)
    so the bound is the larger of d(z_lo) + sigma[z_lo, x0) and
    d(z_hi) + sigma[x0, z_hi). A missing neighbour contributes the trivial
    bound 1 - sigma[x0, inf) or sigma[x0, inf).
    """
    kind = ChebKind.parse(kind)
    m0 = adjacent_order(n0)
    eps = _moments_of(source, kind, 2 * m0 - 2)
    zeros = cheb_zeros(kind, m0)
    x0 = float(x0)
    s0 = float(sigma_tail(kind, x0))
    i = int(np.searchsorted(zeros, x0, side="right"))  # zeros[:i] <= x0

    if i > 0 and zeros[i - 1] == x0:
        env = build_envelope(kind, m0, i)
        return _report(env.coefficient_gap, bound_terms(env, eps), n0, x0, 1.0)

    sides = []
    if i > 0:
        env = build_envelope(kind, m0, i)
        gap = float(sigma_tail(kind, env.node)) - s0
        sides.append((env.coefficient_gap + gap, bound_terms(env, eps)))
    else:
        sides.append((1.0 - s0, np.zeros(0)))
    if i < m0:
        env = build_envelope(kind, m0, i + 1)
        gap = s0 - float(sigma_tail(kind, env.node))
        sides.append((env.coefficient_gap + gap, bound_terms(env, eps)))
    else:
        sides.append((s0, np.zeros(0)))
    leading, terms = max(sides, key=lambda side: side[0] + math.fsum(side[1]))
    return _report(leading, terms, n0, x0, 1.0)


def cms_bound_profile(
    source: MomentSource, kind: ChebKind, x0_grid: ArrayLike, n0: int
) -> np.ndarray:
    kind = ChebKind.parse(kind)
    grid = np.atleast_1d(np.asarray(x0_grid, dtype=float))
    eps = _moments_of(source, kind, 2 * adjacent_order(n0) - 2)
    return np.array([cms_bound_at(eps, kind, x, n0).bound_value for x in grid])


# -----------------------------
# Calibration
# -----------------------------
class CalibrationWitness(NamedTuple):
    label: str
    n0: int
    x0: Optional[float]
    ratio: float


class Calibration(NamedTuple):
    k1: float
    k2: float
    k3: float
    witnesses: Dict[str, CalibrationWitness]

    def as_dict(self) -> dict:
        return {
            "k1": self.k1,
            "k2": self.k2,
            "k3": self.k3,
            "witnesses": {k: w._asdict() for k, w in self.witnesses.items()},
        }


def _better(best: Optional[CalibrationWitness], cand: CalibrationWitness):
    return cand if best is None or cand.ratio > best.ratio else best


def calibrate_K(
    corpus: Iterable[DiscreteMeasure],
    n0_list: Sequence[int],
    x0_grid: Optional[ArrayLike] = None,
) -> Calibration:
    """
    Smallest constants making each inequality hold on the corpus.

    Circle measures calibrate K1, line measures K2 (first kind, worst x0)
    and K3 (second kind at every atom and grid point, both tail
    conventions). A constant with no contributing measure is reported as 0.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("calibration needs a nonempty corpus")
    n0_list = sorted({int(n) for n in n0_list})
    grid = default_grid() if x0_grid is None else np.asarray(x0_grid, dtype=float)
    best: Dict[str, Optional[CalibrationWitness]] = {"k1": None, "k2": None, "k3": None}
    top = max(n0_list)

    for mu in corpus:
        if mu.domain is Domain.CIRCLE:
            arc = arc_discrepancy(mu).value
            nu_hat = fourier(mu, top)
            for n0 in n0_list:
                ratio = arc / et_circle(nu_hat, n0, 1.0).bound_value
                best["k1"] = _better(best["k1"], CalibrationWitness(mu.label, n0, None, ratio))
            continue

        t = moments(mu, ChebKind.FIRST, top)
        u = moments(mu, ChebKind.SECOND, top)
        worst = true_discrepancy(mu, ChebKind.FIRST)
        points = np.concatenate([mu.positions, grid])
        d2 = np.asarray(two_sided_discrepancy(mu, ChebKind.SECOND, points))
        for n0 in n0_list:
            ratio = worst.value / et_interval_t(t, n0, 1.0).bound_value
            best["k2"] = _better(best["k2"], CalibrationWitness(mu.label, n0, worst.x0, ratio))
            ratios = d2 / et_bound_profile(u, ChebKind.SECOND, n0, points, 1.0)
            j = int(np.argmax(ratios))
            best["k3"] = _better(
                best["k3"], CalibrationWitness(mu.label, n0, float(points[j]), float(ratios[j]))
            )

    witnesses = {name: w for name, w in best.items() if w is not None}
    for name, w in witnesses.items():
        log.info("calibrated %s=%.6g from %s (n0=%d)", name, w.ratio, w.label, w.n0)
    return Calibration(
        *(float(best[name].ratio) if best[name] else 0.0 for name in ("k1", "k2", "k3")),
        witnesses=witnesses,
    )
