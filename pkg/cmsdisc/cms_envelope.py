"""
cms_envelope: Chebyshev-Markov-Stieltjes majorant/minorant pairs.

For the zeros x_1 < ... < x_n0 of S_n0 and a node index k0, builds

  R  the Lagrange cardinal polynomial of x_k0 (degree n0 - 1)
  Q  the Hermite interpolant with Q(x_k) = 1 for k > k0, 0 for k <= k0 and
     Q'(x_k) = 0 for k != k0 (degree <= 2 n0 - 2)
  P  = Q + R^2

so that P >= 1[x_k0, inf) >= 1(x_k0, inf) >= Q on the whole line. The
expansion coefficients p_n, q_n turn moments of a measure into a bound on
its tail discrepancy at x_k0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from cmsdisc.chebyshev_core import (
    ChebKind,
    ChebSeries,
    cheb_zeros,
    gauss_rule,
    gram_diagonal,
    project,
    series_add,
    series_derivative,
    series_eval,
    series_multiply,
    sigma_tail,
    to_second_kind,
)
from cmsdisc.config import load_defaults
from cmsdisc.errors import IllConditioned, IndexOutOfRange
from cmsdisc.measures import MomentKind, MomentSequence

log = logging.getLogger(__name__)

# nodes of the Gauss rule used for int R^2 |S_n| d sigma
COEFFICIENT_BOUND_NODES = 4096


@dataclass(frozen=True, eq=False)
class CmsEnvelope:
    kind: ChebKind
    n0: int
    k0: int
    nodes: np.ndarray
    P: ChebSeries
    Q: ChebSeries
    R: ChebSeries
    p: np.ndarray  # length 2 n0 - 1
    q: np.ndarray
    gauss_weights: np.ndarray

    @property
    def node(self) -> float:
        """x_k0."""
        return float(self.nodes[self.k0 - 1])

    @property
    def weight(self) -> float:
        """lambda_k0."""
        return float(self.gauss_weights[self.k0 - 1])

    @property
    def coefficient_gap(self) -> float:
        """p_0 - q_0 read off the coefficient sequences."""
        return float(self.p[0] - self.q[0])

    @property
    def moment_order(self) -> int:
        """Highest moment the bound at this node consumes."""
        return 2 * self.n0 - 2


class EnvelopeCheck(NamedTuple):
    interpolation_error: float
    ordering_violation: float
    identity_error: float
    gauss_error: float
    ok: bool


class OneSidedBounds(NamedTuple):
    upper: float  # bound on mu[x_k0, inf)
    lower: float  # bound on mu(x_k0, inf) from below


def _envelope_limits() -> dict:
    return load_defaults()["envelope"]


def _check_indices(n0: int, k0: int) -> None:
    max_n0 = int(_envelope_limits()["max_n0"])
    if not 1 <= n0 <= max_n0:
        raise IndexOutOfRange(f"n0 must lie in 1..{max_n0}, got {n0}")
    if not 1 <= k0 <= n0:
        raise IndexOutOfRange(f"k0 must lie in 1..{n0}, got {k0}")


def build_r(kind: ChebKind, n0: int, k0: int) -> ChebSeries:
    """
    Cardinal polynomial R with R(x_k) = delta_{k k0}.

    S_n0 is divided by (x - x_k0) with the Chebyshev-basis form of synthetic
    division, then scaled by the quotient's value at x_k0 (which is
    S_n0'(x_k0)).
    """
    kind = ChebKind.parse(kind)
    _check_indices(n0, k0)
    r = float(cheb_zeros(kind, n0)[k0 - 1])
    a = np.zeros(n0 + 1)
    a[n0] = 1.0
    b = np.zeros(n0 + 1)  # b[n0] stays 0
    # x S_k = (S_{k+1} + S_{k-1}) / 2 for k >= 1 in both bases;
    # x T_0 = T_1 but x U_0 = U_1 / 2
    last = 2 if kind is ChebKind.FIRST else 1
    for k in range(n0, last - 1, -1):
        upper = b[k + 1] if k + 1 <= n0 else 0.0
        b[k - 1] = 2.0 * a[k] - upper + 2.0 * r * b[k]
    if kind is ChebKind.FIRST:
        upper = b[2] if n0 >= 2 else 0.0
        b[0] = a[1] - 0.5 * upper + r * b[1]
    quotient = ChebSeries(kind, b[:n0])
    return ChebSeries(kind, quotient.coeffs / series_eval(quotient, r))


def _hermite_minorant(kind: ChebKind, nodes: np.ndarray, k0: int) -> ChebSeries:
    """Solve for Q in the T basis by QR; rows for Q' are scaled by sin(t)/D."""
    n0 = len(nodes)
    degree = 2 * n0 - 2
    theta = np.arccos(nodes)
    j = np.arange(degree + 1)
    value_rows = np.cos(np.outer(theta, j))
    values = (np.arange(1, n0 + 1) > k0).astype(float)
    others = np.arange(n0) != k0 - 1
    # T_j'(cos t) = j sin(j t) / sin(t)
    slope_rows = (j * np.sin(np.outer(theta[others], j))) / degree
    a = np.vstack([value_rows, slope_rows])
    rhs = np.concatenate([values, np.zeros(n0 - 1)])
    qmat, rmat = np.linalg.qr(a)
    coeffs = solve_triangular(rmat, qmat.T @ rhs)
    residual = float(np.max(np.abs(a @ coeffs - rhs)))
    tol = float(_envelope_limits()["residual_tol"])
    if not np.isfinite(residual) or residual > tol:
        raise IllConditioned(
            f"Hermite system for n0={n0}, k0={k0}: residual {residual:.3e} exceeds {tol:g}"
        )
    log.debug("hermite solve n0=%d k0=%d residual=%.3e", n0, k0, residual)
    q = ChebSeries(ChebKind.FIRST, coeffs)
    return q if kind is ChebKind.FIRST else to_second_kind(q)


def build_envelope(kind: ChebKind, n0: int, k0: int) -> CmsEnvelope:
    """Majorant/minorant pair at x_k0; memoised per (kind, n0, k0)."""
    kind = ChebKind.parse(kind)
    _check_indices(int(n0), int(k0))
    return _build_envelope(kind, int(n0), int(k0))


@lru_cache(maxsize=1024)
def _build_envelope(kind: ChebKind, n0: int, k0: int) -> CmsEnvelope:
    rule = gauss_rule(kind, n0)
    R = build_r(kind, n0, k0)
    if n0 == 1:
        Q = ChebSeries(kind, [0.0])
    else:
        Q = _hermite_minorant(kind, rule.nodes, k0)
    P = series_add(Q, series_multiply(R, R))
    degree = 2 * n0 - 2
    p = project(P, degree, kind, nodes=degree + 2).padded(degree + 1)
    q = project(Q, degree, kind, nodes=degree + 2).padded(degree + 1)
    p.setflags(write=False)
    q.setflags(write=False)
    log.debug("built envelope kind=%s n0=%d k0=%d", kind.value, n0, k0)
    return CmsEnvelope(kind, n0, k0, rule.nodes, P, Q, R, p, q, rule.weights)


def p0_minus_q0(env: CmsEnvelope) -> float:
    """int R^2 d sigma by a Gauss rule exact at degree 2 n0 - 2."""
    rule = gauss_rule(env.kind, 2 * env.n0)
    return rule.integrate(lambda x: np.asarray(series_eval(env.R, x)) ** 2)


def tail_integral(kind: ChebKind, n: int, x0: float) -> float:
    """
    int_{x0}^{inf} S_n d sigma in closed form, x0 clamped to [-1, 1].

    First kind: sin(n t0) / (n pi). Second kind:
    (sin(n t0) / n - sin((n + 2) t0) / (n + 2)) / pi, with t0 = arccos(x0).
    """
    kind = ChebKind.parse(kind)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return float(sigma_tail(kind, x0))
    t0 = float(np.arccos(np.clip(x0, -1.0, 1.0)))
    if kind is ChebKind.FIRST:
        return float(np.sin(n * t0) / (n * np.pi))
    return float((np.sin(n * t0) / n - np.sin((n + 2) * t0) / (n + 2)) / np.pi)


def _moment_terms(env: CmsEnvelope, eps: MomentSequence) -> np.ndarray:
    eps.require(MomentKind.for_cheb(env.kind))
    return np.abs(eps.upto(env.moment_order))


def discrepancy_bound(env: CmsEnvelope, eps: MomentSequence) -> float:
    """(p0 - q0) + sum_{n=1}^{2 n0 - 2} |eps_n| max(|p_n|, |q_n|)."""
    e = _moment_terms(env, eps)
    scale = np.maximum(np.abs(env.p[1:]), np.abs(env.q[1:]))
    return float(env.coefficient_gap + np.dot(e, scale))


def bound_terms(env: CmsEnvelope, eps: MomentSequence) -> np.ndarray:
    """The per-n summands of discrepancy_bound."""
    e = _moment_terms(env, eps)
    return e * np.maximum(np.abs(env.p[1:]), np.abs(env.q[1:]))


def one_sided_bounds(env: CmsEnvelope, eps: MomentSequence) -> OneSidedBounds:
    e = _moment_terms(env, eps)
    s = float(sigma_tail(env.kind, env.node))
    gap = env.coefficient_gap
    return OneSidedBounds(
        upper=s + gap + float(np.dot(e, np.abs(env.p[1:]))),
        lower=s - gap - float(np.dot(e, np.abs(env.q[1:]))),
    )


def coefficient_decay(env: CmsEnvelope) -> List[Tuple[int, float, float]]:
    return [
        (n, float(abs(env.p[n])), float(abs(env.q[n])))
        for n in range(1, env.moment_order + 1)
    ]


def coefficient_bound(env: CmsEnvelope, n: int, nodes: Optional[int] = None) -> float:
    """
    Analytic bound on max(|p_n|, |q_n|).

    0 <= P - 1[x_k0, inf) <= R^2 and 0 <= 1(x_k0, inf) - Q <= R^2, so
    |int P S_n| and |int Q S_n| are at most |tail_integral| + int R^2 |S_n|.
    """
    rule = gauss_rule(env.kind, nodes or COEFFICIENT_BOUND_NODES)
    unit = np.zeros(n + 1)
    unit[n] = 1.0
    s_n = ChebSeries(env.kind, unit)
    spread = rule.integrate(
        lambda x: np.asarray(series_eval(env.R, x)) ** 2 * np.abs(series_eval(s_n, x))
    )
    gram = gram_diagonal(env.kind, n)[n]
    return (abs(tail_integral(env.kind, n, env.node)) + spread) / gram


def envelope_grid(env: CmsEnvelope, points: Optional[int] = None) -> np.ndarray:
    """Equispaced grid over [-1 - 2/n0, 1 + 2/n0]."""
    points = points or int(_envelope_limits()["grid_points"])
    reach = 1.0 + 2.0 / env.n0
    return np.linspace(-reach, reach, points)


def check_envelope(env: CmsEnvelope, points: Optional[int] = None) -> EnvelopeCheck:
    limits = _envelope_limits()
    tol = float(limits["check_tol"])
    k = np.arange(1, env.n0 + 1)
    others = k != env.k0
    x = env.nodes

    dP, dQ = series_derivative(env.P), series_derivative(env.Q)
    interp = max(
        np.max(np.abs(np.asarray(series_eval(env.P, x)) - (k >= env.k0))),
        np.max(np.abs(np.asarray(series_eval(env.Q, x)) - (k > env.k0))),
        np.max(np.abs(np.asarray(series_eval(env.R, x)) - (k == env.k0))),
        np.max(np.abs(np.asarray(series_eval(dP, x))[others]), initial=0.0),
        np.max(np.abs(np.asarray(series_eval(dQ, x))[others]), initial=0.0),
    )

    grid = envelope_grid(env, points)
    closed = (grid >= env.node).astype(float)
    opened = (grid > env.node).astype(float)
    ordering = max(
        0.0,
        float(np.max(closed - np.asarray(series_eval(env.P, grid)))),
        float(np.max(np.asarray(series_eval(env.Q, grid)) - opened)),
    )

    length = env.moment_order + 1
    square = series_multiply(env.R, env.R)
    identity = max(
        float(np.max(np.abs(env.P.padded(length) - env.Q.padded(length) - square.padded(length)))),
        float(np.max(np.abs((env.p - env.q) - square.padded(length)))),
    )

    lam = env.gauss_weights
    gauss = max(
        abs(env.p[0] - lam[env.k0 - 1 :].sum()),
        abs(env.q[0] - lam[env.k0 :].sum()),
        abs(p0_minus_q0(env) - env.weight),
        abs(env.coefficient_gap - env.weight),
    )

    ok = interp <= tol and ordering <= tol and identity <= tol and gauss <= 1e-10
    if not ok:
        log.warning(
            "envelope check failed kind=%s n0=%d k0=%d: interp=%.2e order=%.2e "
            "identity=%.2e gauss=%.2e",
            env.kind.value,
            env.n0,
            env.k0,
            interp,
            ordering,
            identity,
            gauss,
        )
    return EnvelopeCheck(float(interp), float(ordering), float(identity), float(gauss), bool(ok))


def sample_envelope(env: CmsEnvelope, points: int = 101) -> List[Tuple[float, float, float]]:
    """(x, P(x), Q(x)) on the check grid, for plotting."""
    grid = envelope_grid(env, points)
    return list(
        zip(
            grid.tolist(),
            np.asarray(series_eval(env.P, grid)).tolist(),
            np.asarray(series_eval(env.Q, grid)).tolist(),
        )
    )
