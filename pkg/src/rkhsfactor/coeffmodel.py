"""Degree-truncated coefficient model of radially weighted spaces on the disc.

The space with kernel ``k(z, w) = sum_m c_m (z conj(w))^m`` has orthogonal
monomials with ``||z^m||^2 = 1 / c_m``.  Polynomials of degree at most ``D``
are stored by their coefficient vectors (ascending powers); all orthogonal
projections are done in the isometric coordinates ``a_m / sqrt(c_m)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ._linalg import svd_rank
from .errors import EmptySubspaceError, NumericalError, ShapeError

STABILITY_FLAG = 1e-3


@dataclass(frozen=True, eq=False)
class CoeffSeriesSpace:
    """Weights ``c_0, ..., c_D`` of a unitarily invariant kernel, truncated at degree ``D``."""

    weights: np.ndarray
    variant: str = "custom"

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ShapeError("weights must be a nonempty vector")
        if np.any(w <= 0):
            raise ValueError("coefficient model weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def degree(self) -> int:
        return self.weights.size - 1

    @classmethod
    def hardy(cls, degree: int) -> "CoeffSeriesSpace":
        return cls(np.ones(degree + 1), "hardy")

    @classmethod
    def bergman(cls, degree: int) -> "CoeffSeriesSpace":
        return cls(np.arange(1, degree + 2, dtype=float), "bergman")

    @classmethod
    def power_alpha(cls, alpha: float, degree: int) -> "CoeffSeriesSpace":
        """Taylor weights of ``(1 - x)^(-alpha)``: ``Gamma(m + alpha) / (Gamma(alpha) m!)``."""
        m = np.arange(degree + 1, dtype=float)
        return cls(np.exp(gammaln(m + alpha) - gammaln(alpha) - gammaln(m + 1)), "power_alpha")

    @classmethod
    def named(cls, name: str, degree: int, alpha: float | None = None) -> "CoeffSeriesSpace":
        if name == "hardy":
            return cls.hardy(degree)
        if name == "bergman":
            return cls.bergman(degree)
        if name == "power_alpha":
            return cls.power_alpha(alpha, degree)
        raise ValueError(f"unknown weight variant {name!r}")

    def resized(self, degree: int) -> "CoeffSeriesSpace":
        """Same family at another truncation degree (named variants only)."""
        if self.variant == "custom":
            raise ValueError("custom weights cannot be resized")
        if self.variant == "power_alpha":
            alpha = self.weights[1] if self.degree >= 1 else 1.0
            return CoeffSeriesSpace.power_alpha(float(alpha), degree)
        return CoeffSeriesSpace.named(self.variant, degree)

    def norm_sq(self, coeffs) -> float:
        a = self._pad(coeffs)
        return float(np.sum(np.abs(a) ** 2 / self.weights))

    def kernel_diag(self, points) -> np.ndarray:
        r2 = np.abs(np.asarray(points, dtype=complex)) ** 2
        return np.polynomial.polynomial.polyval(r2, self.weights)

    def _pad(self, coeffs) -> np.ndarray:
        a = np.asarray(coeffs, dtype=complex)
        if a.size > self.weights.size:
            if np.any(a[self.weights.size:] != 0):
                raise ShapeError(f"polynomial degree exceeds the truncation degree {self.degree}")
            a = a[:self.weights.size]
        out = np.zeros(self.weights.size, dtype=complex)
        out[:a.size] = a
        return out


@dataclass(frozen=True, eq=False)
class PolyElement:
    coeffs: np.ndarray

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def norm_sq(self, space: CoeffSeriesSpace) -> float:
        return space.norm_sq(self.coeffs)


def _coeffs(g) -> np.ndarray:
    c = g.coeffs if isinstance(g, PolyElement) else g
    c = np.trim_zeros(np.asarray(c, dtype=complex), "b")
    if c.size == 0:
        raise ValueError("generators must be nonzero polynomials")
    return c


def generate_invariant_subspace(space: CoeffSeriesSpace, generators: Sequence,
                                tol_rank: float = 1e-24) -> np.ndarray:
    """Orthonormal basis (coefficient columns) of ``span{z^m q_j : deg <= D}``.

    The default cutoff is on squared singular values, i.e. a singular value
    cutoff of ``1e-12`` relative.
    """
    d = space.degree
    cols = []
    for g in generators:
        c = _coeffs(g)
        if c.size - 1 > d:
            raise ShapeError(f"generator degree {c.size - 1} exceeds truncation degree {d}")
        for m in range(d - (c.size - 1) + 1):
            col = np.zeros(d + 1, dtype=complex)
            col[m:m + c.size] = c
            cols.append(col)
    if not cols:
        raise EmptySubspaceError("no generators")
    sq = np.sqrt(space.weights)
    a = np.stack(cols, axis=1) / sq[:, None]
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = svd_rank(s, tol_rank)
    if r == 0:
        raise EmptySubspaceError("generators span the zero subspace")
    return u[:, :r] * sq[:, None]


def _iso_coords(space: CoeffSeriesSpace, basis: np.ndarray) -> np.ndarray:
    return basis / np.sqrt(space.weights)[:, None]


def diag_subspace_kernel(space: CoeffSeriesSpace, basis: np.ndarray, points) -> np.ndarray:
    """``k^M(z, z) = sum_j |e_j(z)|^2`` at each point."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if basis.shape[1] == 0:
        return np.zeros(pts.shape)
    y = _iso_coords(space, basis)
    pw = np.arange(space.degree + 1)
    # row m of v is sqrt(c_m) z^m so that e_j(z) = y_j . v(z)
    v = np.sqrt(space.weights)[:, None] * pts[None, :] ** pw[:, None]
    vals = y.T @ v
    return np.sum(np.abs(vals) ** 2, axis=0)


@dataclass(frozen=True)
class RootFunctionReport:
    radii: tuple[float, ...]
    theta: float
    values: tuple[float, ...]
    degree: int

    def rows(self, generator_spec: str = "") -> list[dict]:
        return [{"r": r, "theta": self.theta, "G_value": g, "D": self.degree,
                 "generator_spec": generator_spec} for r, g in zip(self.radii, self.values)]


def root_function(space: CoeffSeriesSpace, basis: np.ndarray, radii: Sequence[float],
                  theta: float = 0.0) -> RootFunctionReport:
    """``G(r e^{i theta}) = k^M(z, z) / k(z, z)`` along a ray."""
    radii = tuple(float(r) for r in radii)
    pts = np.array([r * np.exp(1j * theta) for r in radii])
    g = diag_subspace_kernel(space, basis, pts) / space.kernel_diag(pts)
    if np.any(g < -1e-12) or np.any(g > 1.0 + 1e-8):
        raise NumericalError(f"root function left [0, 1]: range [{g.min():.3e}, {g.max():.3e}]")
    return RootFunctionReport(radii, float(theta), tuple(float(x) for x in g), space.degree)


def truncation_change(space: CoeffSeriesSpace, generators: Sequence, radii: Sequence[float],
                      theta: float = 0.0) -> float:
    """Largest change in ``G`` along the ray when the degree cap ``D`` is doubled."""
    base = root_function(space, generate_invariant_subspace(space, generators), radii, theta)
    big = space.resized(2 * space.degree)
    ref = root_function(big, generate_invariant_subspace(big, generators), radii, theta)
    return float(np.max(np.abs(np.array(base.values) - np.array(ref.values))))


def radial_sweep(space: CoeffSeriesSpace, generators: Sequence, radii: Sequence[float],
                 thetas: Sequence[float], check_stability: bool = True) -> dict:
    """Root-function values on a polar grid, plus the doubling-stability diagnostic."""
    basis = generate_invariant_subspace(space, generators)
    reports = [root_function(space, basis, radii, t) for t in thetas]
    change = None
    if check_stability:
        big = space.resized(2 * space.degree)
        big_basis = generate_invariant_subspace(big, generators)
        change = 0.0
        for rep in reports:
            ref = root_function(big, big_basis, radii, rep.theta)
            change = max(change, float(np.max(np.abs(np.subtract(rep.values, ref.values)))))
    return {"reports": reports, "subspace_dim": basis.shape[1],
            "stability_change": change,
            "stability_flag": bool(change is not None and change > STABILITY_FLAG)}


def fejer_means(symbol_coeffs, n: int) -> np.ndarray:
    """Cesaro mean ``p_n``: coefficient ``m`` scaled by ``1 - m / (n + 1)``, zero past ``n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a = np.asarray(symbol_coeffs, dtype=complex)
    m = np.arange(a.size)
    w = np.clip(1.0 - m / (n + 1), 0.0, None)
    return a * w


def poly_eval(coeffs, z) -> np.ndarray:
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex),
                                            np.asarray(coeffs, dtype=complex))


def _weights(w, degree: int) -> np.ndarray:
    if isinstance(w, str):
        return CoeffSeriesSpace.named(w, degree).weights
    if isinstance(w, CoeffSeriesSpace):
        w = w.weights
    arr = np.asarray(w, dtype=float)
    if arr.size < degree + 1:
        raise ShapeError(f"need {degree + 1} weights, got {arr.size}")
    if np.any(arr[:degree + 1] <= 0):
        raise ValueError("weights must be positive")
    return arr[:degree + 1]


def inclusion_sigma_min(degree: int, weights_num="hardy", weights_den="bergman") -> float:
    """Smallest singular value of the inclusion between two weighted polynomial spaces.

    The inclusion is diagonal in the monomials: ``z^m`` normalized in the first
    space has norm ``sqrt(c_num_m / c_den_m)`` in the second.
    """
    cn = _weights(weights_num, degree)
    cd = _weights(weights_den, degree)
    return float(np.min(np.sqrt(cn / cd)))
