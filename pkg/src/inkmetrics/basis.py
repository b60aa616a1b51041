"""Legendre-Sobolev bases on [0, 1] and series projection of ink traces.

The basis B_0..B_d is orthonormal under

    <f, g> = int_0^1 f g ds  +  mu * int_0^1 f' g' ds

and is produced by Gram-Schmidt over polynomial degrees with the positive
leading-coefficient sign convention. Internally every polynomial is carried as
coefficients over orthonormal shifted Legendre polynomials (Clenshaw evaluation
on x = 2s - 1), which stays well conditioned through degree 30; monomial
coefficient views are derived from exact integer Legendre tables and are for
inspection only. Projection integrals of piecewise-linear traces are evaluated
in closed form per segment, so there is no quadrature tolerance anywhere in the
pipeline.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import ConfigError, ValidationError
from .ink import ParameterizedTrace

MAX_DEGREE = 30
DEFAULT_DEGREE = 12
DEFAULT_MU = 0.125

_DOMAIN_SLACK = 1e-9


def _sobolev_gram_orthonormal_legendre(degree: int, mu: float) -> np.ndarray:
    """Gram matrix of sqrt(2k+1)*P_k(2s-1) under the Sobolev inner product.

    The L2 part is the identity. The derivative part has the closed form
    2*min(i,j)*(min(i,j)+1) for same-parity i, j >= 1 before normalization.
    """
    n = degree + 1
    G = np.eye(n)
    for i in range(1, n):
        for j in range(1, n):
            if (i + j) % 2 == 0:
                m = min(i, j)
                G[i, j] += mu * 2.0 * m * (m + 1) * math.sqrt((2 * i + 1) * (2 * j + 1))
    return G


def _gram_schmidt(G: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalization pass under metric G.

    Rows of the result expand each basis polynomial over the orthonormal
    shifted-Legendre functions. The expansion is triangular, so forcing the
    diagonal positive makes every leading monomial coefficient positive.
    """
    n = G.shape[0]
    C = np.eye(n)
    for i in range(n):
        v = C[i].copy()
        for _ in range(2):
            for j in range(i):
                v -= (C[j] @ G @ v) * C[j]
        v /= math.sqrt(v @ G @ v)
        if v[i] < 0:
            v = -v
        C[i] = v
    return C


def _shifted_legendre_monomial_table(degree: int) -> np.ndarray:
    """Row k: exact integer monomial coefficients (ascending in s) of P_k(2s-1)."""
    T = np.zeros((degree + 1, degree + 1))
    for n in range(degree + 1):
        for k in range(n + 1):
            T[n, k] = float((-1) ** (n + k) * math.comb(n, k) * math.comb(n + k, k))
    return T


class LSBasis:
    """Orthonormal Legendre-Sobolev basis of a given degree and weight mu."""

    def __init__(self, degree: int, mu: float):
        if not isinstance(degree, int) or not 1 <= degree <= MAX_DEGREE:
            raise ConfigError(f"degree must be an integer in 1..{MAX_DEGREE}, got {degree!r}")
        if not (isinstance(mu, (int, float)) and math.isfinite(mu) and mu >= 0):
            raise ConfigError(f"mu must be a finite real >= 0, got {mu!r}")
        self.degree = degree
        self.mu = float(mu)

        C = _gram_schmidt(_sobolev_gram_orthonormal_legendre(degree, self.mu))
        scal = np.sqrt(2.0 * np.arange(degree + 1) + 1.0)
        # column j = plain-Legendre coefficients (in x = 2s-1) of B_j
        self._legc = (C * scal).T.copy()
        self._dlegc = npleg.legder(self._legc, axis=0) * 2.0  # d/ds
        # antiderivatives for segment-exact projection: F1 = int B ds, F2 = int s*B ds
        f1 = npleg.legint(self._legc, axis=0) * 0.5
        smul = np.zeros((degree + 2, degree + 1))
        for j in range(degree + 1):
            col = self._legc[:, j]
            m = npleg.legmulx(col)  # may trim trailing zeros
            smul[: len(m), j] = 0.5 * m
            smul[: degree + 1, j] += 0.5 * col
        f2 = npleg.legint(smul, axis=0) * 0.5
        self._f1c = f1
        self._f2c = f2
        self._gs_rows = C

    @property
    def key(self) -> str:
        return f"ls-d{self.degree}-mu{self.mu:.17g}"

    def __repr__(self):
        return f"LSBasis(degree={self.degree}, mu={self.mu})"

    def __eq__(self, other):
        return isinstance(other, LSBasis) and self.degree == other.degree and self.mu == other.mu

    def __hash__(self):
        return hash((self.degree, self.mu))

    # -- evaluation ---------------------------------------------------------

    def eval_all(self, s) -> np.ndarray:
        """Values of every basis function at s: shape (degree+1,) + shape(s)."""
        return npleg.legval(2.0 * np.asarray(s) - 1.0, self._legc)

    def eval_all_deriv(self, s) -> np.ndarray:
        return npleg.legval(2.0 * np.asarray(s) - 1.0, self._dlegc)

    def to_legendre(self, coeffs: np.ndarray) -> np.ndarray:
        """Plain-Legendre coefficients (in x = 2s-1) of sum(coeffs[i] * B_i)."""
        return self._legc @ np.asarray(coeffs, dtype=float)

    def from_legendre(self, leg: np.ndarray) -> np.ndarray:
        """Inverse of to_legendre. The expansion matrix is triangular."""
        return np.linalg.solve(self._legc, np.asarray(leg, dtype=float))

    # -- monomial views (inspection only; evaluation never goes through these)

    @cached_property
    def basis_coeffs(self) -> np.ndarray:
        """Row i: ascending monomial coefficients of B_i(s).

        Derived from exact integer shifted-Legendre tables. Monomial
        representations of high-degree polynomials are intrinsically
        ill-conditioned; use eval_all for numerics.
        """
        scal = np.sqrt(2.0 * np.arange(self.degree + 1) + 1.0)
        return (self._gs_rows * scal) @ _shifted_legendre_monomial_table(self.degree)

    @cached_property
    def deriv_coeffs(self) -> np.ndarray:
        """Row i: ascending monomial coefficients of B_i'(s), zero padded."""
        d = self.degree
        out = np.zeros((d + 1, d + 1))
        out[:, :d] = self.basis_coeffs[:, 1:] * np.arange(1, d + 1)
        return out


_cache: dict[tuple[int, float], LSBasis] = {}
_cache_lock = threading.Lock()


def build_basis(degree: int = DEFAULT_DEGREE, mu: float = DEFAULT_MU) -> LSBasis:
    """Return the (cached) orthonormal Legendre-Sobolev basis for (degree, mu)."""
    key = (degree, float(mu)) if isinstance(mu, (int, float)) else (degree, mu)
    basis = _cache.get(key)
    if basis is None:
        basis = LSBasis(degree, mu)
        with _cache_lock:
            basis = _cache.setdefault(key, basis)
    return basis


@dataclass(frozen=True)
class SeriesPair:
    """Truncated series for one symbol: x(s) = sum x_i B_i(s), same for y."""

    x: np.ndarray
    y: np.ndarray
    basis: LSBasis

    def __post_init__(self):
        n = self.basis.degree + 1
        for name, c in (("x", self.x), ("y", self.y)):
            c = np.asarray(c, dtype=float)
            if c.shape != (n,):
                raise ValidationError(f"{name} coefficients must have length {n}")
            if not np.all(np.isfinite(c)):
                raise ValidationError(f"{name} coefficients contain non-finite values")
            object.__setattr__(self, name, c)

    @cached_property
    def _xleg(self):
        return self.basis.to_legendre(self.x)

    @cached_property
    def _yleg(self):
        return self.basis.to_legendre(self.y)

    @cached_property
    def _xleg_d(self):
        return npleg.legder(self._xleg) * 2.0

    @cached_property
    def _yleg_d(self):
        return npleg.legder(self._yleg) * 2.0


def _check_domain(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < -_DOMAIN_SLACK) or np.any(s > 1.0 + _DOMAIN_SLACK):
        raise ValidationError("s outside [0, 1]")
    return np.clip(s, 0.0, 1.0)


def evaluate(series: SeriesPair, s, order: int = 0):
    """Evaluate the series (order 0) or its exact derivative (order 1) at s."""
    s = _check_domain(s)
    x = 2.0 * s - 1.0
    if order == 0:
        return npleg.legval(x, series._xleg), npleg.legval(x, series._yleg)
    if order == 1:
        return npleg.legval(x, series._xleg_d), npleg.legval(x, series._yleg_d)
    raise ValidationError(f"order must be 0 or 1, got {order!r}")


def project(trace: ParameterizedTrace, basis: LSBasis) -> SeriesPair:
    """Orthogonal projection of a piecewise-linear trace onto the basis span.

    On each linear segment the trace is a + b*s with constant derivative b, so
    both inner-product integrals reduce to evaluations of precomputed
    antiderivatives at the segment endpoints; the result is exact per segment
    up to roundoff.
    """
    s = np.asarray(trace.s, dtype=float)
    if np.any(np.diff(s) <= 0):
        raise ValidationError("trace parameter values must be strictly increasing")
    xn = 2.0 * s - 1.0
    B = npleg.legval(xn, basis._legc)
    F1 = npleg.legval(xn, basis._f1c)
    F2 = npleg.legval(xn, basis._f2c)
    dF1 = np.diff(F1, axis=1)
    dF2_shift = np.diff(F2, axis=1) - s[:-1] * dF1  # int over seg of (s - s_left) * B
    dB = np.diff(B, axis=1)
    ds = np.diff(s)

    def coeffs(vals):
        left = vals[:-1]
        slope = np.diff(vals) / ds
        return dF1 @ left + dF2_shift @ slope + basis.mu * (dB @ slope)

    return SeriesPair(x=coeffs(trace.xy[:, 0]), y=coeffs(trace.xy[:, 1]), basis=basis)


def reconstruction_error(trace: ParameterizedTrace, series: SeriesPair) -> float:
    """Normalized RMS distance between trace points and the series at the same s.

    The RMS Euclidean deviation is divided by the trace's bounding-box diagonal,
    making the result dimensionless and comparable across devices.
    """
    ex, ey = evaluate(series, trace.s)
    d2 = (ex - trace.xy[:, 0]) ** 2 + (ey - trace.xy[:, 1]) ** 2
    span = trace.xy.max(axis=0) - trace.xy.min(axis=0)
    diag = float(np.hypot(*span))
    if diag == 0.0:
        raise ValidationError("trace bounding box is a point")
    return float(np.sqrt(d2.mean()) / diag)


def series_from_monomials(basis: LSBasis, x_mono, y_mono) -> SeriesPair:
    """Exact series for polynomial coordinate functions given in monomials of s.

    Useful for constructing synthetic symbols whose critical points are known in
    closed form. Degrees must not exceed the basis degree.
    """

    def convert(mono):
        mono = np.atleast_1d(np.asarray(mono, dtype=float))
        if len(mono) > basis.degree + 1:
            raise ValidationError("polynomial degree exceeds basis degree")
        p = np.polynomial.Polynomial(mono)
        q = p(np.polynomial.Polynomial([0.5, 0.5]))  # substitute s = (x+1)/2
        leg = npleg.poly2leg(q.coef)
        full = np.zeros(basis.degree + 1)
        full[: len(leg)] = leg
        return basis.from_legendre(full)

    return SeriesPair(x=convert(x_mono), y=convert(y_mono), basis=basis)
