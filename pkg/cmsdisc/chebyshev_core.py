"""
chebyshev_core: Chebyshev polynomials of both kinds and their series.

Provides:
  - T_n / U_n evaluation (trigonometric inside [-1, 1], three-term
    recurrence elsewhere and for the second kind)
  - zeros of S_n in increasing order
  - Gauss-Chebyshev rules for the probability measures sigma_1, sigma_2
  - ChebSeries: coefficients in the T or U basis, with evaluation,
    products, derivatives and projection by quadrature
  - sigma_tail / sigma_density for the two reference laws

U_n is the standard sin((n+1)t)/sin(t); it is the family orthogonal for
sigma_2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from cmsdisc.errors import KindMismatch

ArrayLike = Union[float, np.ndarray]


class ChebKind(str, enum.Enum):
    FIRST = "t"  # T_n, weight sigma_1
    SECOND = "u"  # U_n, weight sigma_2

    @classmethod
    def parse(cls, value: Union[str, "ChebKind"]) -> "ChebKind":
        if isinstance(value, ChebKind):
            return value
        key = str(value).strip().lower()
        aliases = {
            "t": cls.FIRST,
            "first": cls.FIRST,
            "u": cls.SECOND,
            "second": cls.SECOND,
        }
        if key not in aliases:
            raise ValueError(f"unknown Chebyshev kind {value!r} (expected t or u)")
        return aliases[key]


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _as_output(out: np.ndarray, scalar: bool) -> ArrayLike:
    return float(out.reshape(-1)[0]) if scalar else out


# -----------------------------
# Single polynomials
# -----------------------------
def _recurrence(kind: ChebKind, n: int, x: np.ndarray) -> np.ndarray:
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy() if kind is ChebKind.FIRST else 2.0 * x
    for _ in range(n - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def cheb_eval(kind: ChebKind, n: int, x: ArrayLike) -> ArrayLike:
    """S_n(x) for scalar or array x; any real x is accepted."""
    if n < 0:
        raise ValueError(f"polynomial order must be >= 0, got {n}")
    kind = ChebKind.parse(kind)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if kind is ChebKind.FIRST:
        out = np.empty_like(xs)
        inside = np.abs(xs) <= 1.0
        out[inside] = np.cos(n * np.arccos(xs[inside]))
        out[~inside] = _recurrence(kind, n, xs[~inside])
    else:
        out = _recurrence(kind, n, xs)
    return _as_output(out, scalar)


def cheb_derivative(kind: ChebKind, n: int, x: ArrayLike) -> ArrayLike:
    """S_n'(x)."""
    kind = ChebKind.parse(kind)
    unit = np.zeros(n + 1)
    unit[n] = 1.0
    return series_eval(series_derivative(ChebSeries(kind, unit)), x)


def cheb_vander(kind: ChebKind, x: ArrayLike, degree: int) -> np.ndarray:
    """V[..., n] = S_n(x) for n = 0..degree, by the three-term recurrence."""
    kind = ChebKind.parse(kind)
    xs = np.asarray(x, dtype=float)
    if kind is ChebKind.FIRST:
        return npcheb.chebvander(xs, degree)
    v = np.empty(xs.shape + (degree + 1,))
    v[..., 0] = 1.0
    if degree >= 1:
        v[..., 1] = 2.0 * xs
    for n in range(2, degree + 1):
        v[..., n] = 2.0 * xs * v[..., n - 1] - v[..., n - 2]
    return v


def cheb_zeros(kind: ChebKind, n: int) -> np.ndarray:
    """Zeros x_1 < ... < x_n of S_n."""
    if n < 1:
        raise ValueError(f"need n >= 1 for zeros, got {n}")
    kind = ChebKind.parse(kind)
    k = np.arange(1, n + 1)
    # sine form of cos((2(n-k)+1)pi/(2n)) and cos((n+1-k)pi/(n+1)):
    # exactly antisymmetric, exact 0 in the middle
    if kind is ChebKind.FIRST:
        return np.sin(np.pi * (2 * k - n - 1) / (2 * n))
    return np.sin(np.pi * (2 * k - n - 1) / (2 * (n + 1)))


# -----------------------------
# Reference laws
# -----------------------------
def sigma_density(kind: ChebKind, x: ArrayLike) -> ArrayLike:
    kind = ChebKind.parse(kind)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xs)
    inside = np.abs(xs) < 1.0
    root = np.sqrt(1.0 - xs[inside] ** 2)
    if kind is ChebKind.FIRST:
        out[inside] = 1.0 / (np.pi * root)
    else:
        out[inside] = 2.0 * root / np.pi
    return _as_output(out, scalar)


def sigma_tail(kind: ChebKind, x0: ArrayLike) -> ArrayLike:
    """sigma[x0, +inf) for sigma_1 (FIRST) or sigma_2 (SECOND)."""
    kind = ChebKind.parse(kind)
    scalar = np.ndim(x0) == 0
    xb = np.clip(np.atleast_1d(np.asarray(x0, dtype=float)), -1.0, 1.0)
    theta = np.arccos(xb)
    if kind is ChebKind.FIRST:
        out = theta / np.pi
    else:
        out = (theta - xb * np.sqrt(1.0 - xb * xb)) / np.pi
    return _as_output(out, scalar)


def gram_diagonal(kind: ChebKind, degree: int) -> np.ndarray:
    """int S_n^2 d sigma for n = 0..degree."""
    kind = ChebKind.parse(kind)
    g = np.ones(degree + 1)
    if kind is ChebKind.FIRST:
        g[1:] = 0.5
    return g


# -----------------------------
# Quadrature
# -----------------------------
@dataclass(frozen=True, eq=False)
class QuadratureRule:
    kind: ChebKind
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_rule(kind: ChebKind, m: int) -> QuadratureRule:
    """m-node Gauss rule for the normalised measure sigma_1 or sigma_2."""
    if m < 1:
        raise ValueError(f"need m >= 1 nodes, got {m}")
    kind = ChebKind.parse(kind)
    nodes = cheb_zeros(kind, m)
    if kind is ChebKind.FIRST:
        weights = np.full(m, 1.0 / m)
    else:
        k = np.arange(1, m + 1)
        weights = (2.0 / (m + 1)) * np.sin(k * np.pi / (m + 1)) ** 2
    return QuadratureRule(kind, _readonly(nodes), _readonly(weights))


# -----------------------------
# Series
# -----------------------------
@dataclass(frozen=True, eq=False)
class ChebSeries:
    """sum c_n S_n in the basis of `kind`; exact trailing zeros are dropped."""

    kind: ChebKind
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", ChebKind.parse(self.kind))
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        c = npcheb.chebtrim(c, tol=0) if c.size else np.zeros(1)
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def padded(self, length: int) -> np.ndarray:
        """Coefficients c_0..c_{length-1}, zero-filled past the degree."""
        out = np.zeros(length)
        n = min(length, len(self.coeffs))
        out[:n] = self.coeffs[:n]
        return out

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return series_eval(self, x)


def series_eval(s: ChebSeries, x: ArrayLike) -> ArrayLike:
    """Clenshaw backward recurrence for either basis."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if s.kind is ChebKind.FIRST:
        out = npcheb.chebval(xs, s.coeffs)
    else:
        b1 = np.zeros_like(xs)
        b2 = np.zeros_like(xs)
        for c in s.coeffs[::-1]:
            b1, b2 = c + 2.0 * xs * b1 - b2, b1
        out = b1
    return _as_output(np.asarray(out, dtype=float), scalar)


def to_first_kind(s: ChebSeries) -> ChebSeries:
    if s.kind is ChebKind.FIRST:
        return s
    c = s.coeffs
    # U_n = 2(T_n + T_{n-2} + ...), the trailing T_0 (n even) counted once
    tail = np.zeros(len(c))
    for j in range(len(c) - 1, -1, -1):
        tail[j] = c[j] + (tail[j + 2] if j + 2 < len(c) else 0.0)
    a = 2.0 * tail
    a[0] = tail[0]
    return ChebSeries(ChebKind.FIRST, a)


def to_second_kind(s: ChebSeries) -> ChebSeries:
    if s.kind is ChebKind.SECOND:
        return s
    a = s.coeffs
    # T_0 = U_0, T_n = (U_n - U_{n-2}) / 2
    b = np.zeros(len(a))
    b[0] = a[0]
    b[1:] = 0.5 * a[1:]
    b[: len(a) - 2] -= 0.5 * a[2:]
    return ChebSeries(ChebKind.SECOND, b)


def _convert(s: ChebSeries, kind: ChebKind) -> ChebSeries:
    return to_first_kind(s) if kind is ChebKind.FIRST else to_second_kind(s)


def _check_same_kind(a: ChebSeries, b: ChebSeries) -> None:
    if a.kind is not b.kind:
        raise KindMismatch(f"series kinds differ: {a.kind.value} vs {b.kind.value}")


def series_add(a: ChebSeries, b: ChebSeries) -> ChebSeries:
    _check_same_kind(a, b)
    return ChebSeries(a.kind, npcheb.chebadd(a.coeffs, b.coeffs))


def series_multiply(a: ChebSeries, b: ChebSeries) -> ChebSeries:
    """Product in the common basis; U-series go through the T basis."""
    _check_same_kind(a, b)
    prod = npcheb.chebmul(to_first_kind(a).coeffs, to_first_kind(b).coeffs)
    return _convert(ChebSeries(ChebKind.FIRST, prod), a.kind)


def series_derivative(s: ChebSeries) -> ChebSeries:
    """Derivative, returned in the basis of `s`."""
    d = npcheb.chebder(to_first_kind(s).coeffs) if s.degree > 0 else [0.0]
    return _convert(ChebSeries(ChebKind.FIRST, d), s.kind)


def project(
    f: Callable[[np.ndarray], np.ndarray],
    degree: int,
    kind: ChebKind,
    nodes: int | None = None,
) -> ChebSeries:
    """
    Orthogonal projection of f onto S_0..S_degree.

    Uses a Gauss rule with max(nodes, degree + 1) nodes; the coefficients are
    exact when deg f <= 2m - 1 - degree.
    """
    kind = ChebKind.parse(kind)
    m = max(nodes or 0, degree + 1)
    rule = gauss_rule(kind, m)
    v = cheb_vander(kind, rule.nodes, degree)
    raw = v.T @ (rule.weights * np.asarray(f(rule.nodes), dtype=float))
    return ChebSeries(kind, raw / gram_diagonal(kind, degree))
