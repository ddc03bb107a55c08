"""Finite-sample model of ``H_k (x) E``.

Functions are stored by their values on the sample: an element of the model
is an ``n x p`` array whose row ``i`` is ``f(x_i)``.  Flattened row-major it is
a vector of length ``n p`` lying in the range of the block kernel matrix ``K``;
the inner product is ``<f, g> = g^* K^+ f``.

On a finite sample with positive definite ``s`` every function is a multiplier
of the sampled ``H_s``, so multiplier-invariant subspaces are exactly the
pointwise-constrained ones ``{f : f(x_i) in W_i}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._linalg import RangeBasis, hermitian_part, orth_columns
from .errors import EmptySubspaceError, MembershipError, ShapeError
from .kernels import DEFAULT_TOL_RANK, KernelMatrix

log = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-8
COND_WARN = 1e12


def _basis(k: KernelMatrix, tol_rank: float = DEFAULT_TOL_RANK) -> RangeBasis:
    rb = RangeBasis(k.entries, tol_rank)
    if rb.condition > COND_WARN:
        log.warning("kernel matrix condition number %.2e exceeds %.0e", rb.condition, COND_WARN)
    return rb


@dataclass(frozen=True, eq=False)
class RkhsElement:
    """A function in the sampled space, in value coordinates.

    ``values`` has shape ``(n, p)``; ``coeffs`` satisfies ``vec(values) = K vec(coeffs)``.
    """

    values: np.ndarray
    coeffs: np.ndarray
    norm_sq: float

    @property
    def vector(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(self.norm_sq, 0.0)))


def element(k: KernelMatrix, values, tol_rank: float = DEFAULT_TOL_RANK) -> RkhsElement:
    """Wrap ``values`` (shape ``(n, p)`` or flat ``n p``) as an element of ``H_K``.

    Raises :class:`MembershipError` when the values are not in ``range(K)``.
    """
    v = np.asarray(values, dtype=complex)
    p = k.block_dim
    if v.size != k.size:
        raise ShapeError(f"expected {k.size} values, got {v.size}")
    vec = v.reshape(-1)
    rb = _basis(k, tol_rank)
    resid = rb.range_residual(vec[:, None])
    if resid > MEMBERSHIP_TOL:
        raise MembershipError(f"values are not in the sampled space (residual {resid:.3e})",
                              resid)
    c = rb.pinv_apply(vec[:, None])[:, 0]
    norm_sq = float(np.real(np.vdot(c, vec)))
    return RkhsElement(vec.reshape(k.n, p), c.reshape(k.n, p), norm_sq)


def kernel_column(k: KernelMatrix, i: int, xi=None) -> RkhsElement:
    """The kernel function ``K(., x_i) xi`` (``xi`` defaults to the first basis vector)."""
    p = k.block_dim
    xi = np.eye(p)[:, 0] if xi is None else np.asarray(xi, dtype=complex)
    c = np.zeros((k.n, p), dtype=complex)
    c[i] = xi
    vals = k.entries @ c.reshape(-1)
    return RkhsElement(vals.reshape(k.n, p), c, float(np.real(np.vdot(c.reshape(-1), vals))))


def _value_matrix(k: KernelMatrix, items) -> np.ndarray:
    if isinstance(items, np.ndarray):
        a = np.asarray(items, dtype=complex)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[0] != k.size:
            raise ShapeError(f"spanning matrix needs {k.size} rows, got {a.shape[0]}")
        return a
    cols = []
    for f in items:
        vals = f.values if isinstance(f, RkhsElement) else np.asarray(f, dtype=complex)
        if vals.size != k.size:
            raise ShapeError(f"expected {k.size} values, got {vals.size}")
        cols.append(vals.reshape(-1))
    if not cols:
        return np.zeros((k.size, 0), dtype=complex)
    return np.stack(cols, axis=1)


def gram(k: KernelMatrix, elements, tol_rank: float = DEFAULT_TOL_RANK) -> np.ndarray:
    """``G[a, b] = <f_b, f_a>`` for the given elements (or value columns)."""
    v = _value_matrix(k, elements)
    rb = _basis(k, tol_rank)
    resid = rb.range_residual(v)
    if resid > MEMBERSHIP_TOL:
        raise MembershipError(f"an element is outside the sampled space (residual {resid:.3e})",
                              resid)
    x = rb.coords(v)
    return hermitian_part(x.conj().T @ x)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Closed subspace of the sampled ``H_K``.

    ``onb`` is ``np x m``; its columns are the value vectors of an orthonormal
    basis (orthonormal for the ``H_K`` inner product, not the Euclidean one).
    """

    ambient: KernelMatrix
    onb: np.ndarray

    @property
    def dim(self) -> int:
        return self.onb.shape[1]

    def basis_elements(self) -> list[RkhsElement]:
        k = self.ambient
        return [element(k, self.onb[:, j]) for j in range(self.dim)]

    def coords(self, tol_rank: float = DEFAULT_TOL_RANK) -> np.ndarray:
        """Coordinates of the basis in the orthonormal eigenbasis of the ambient space."""
        return RangeBasis(self.ambient.entries, tol_rank).coords(self.onb)


def whole_space(k: KernelMatrix, tol_rank: float = DEFAULT_TOL_RANK) -> Subspace:
    return Subspace(k, _basis(k, tol_rank).onb)


def subspace_from_spanning(k: KernelMatrix, spanning, tol_rank: float = DEFAULT_TOL_RANK
                           ) -> Subspace:
    """Orthonormalize a spanning family under the ``H_K`` inner product."""
    v = _value_matrix(k, spanning)
    if v.shape[1] == 0:
        raise EmptySubspaceError("empty spanning family")
    g = gram(k, v, tol_rank)
    lam, w = np.linalg.eigh(g)
    lam, w = lam[::-1], w[:, ::-1]
    if lam[0] <= 0.0:
        raise EmptySubspaceError("all spanning vectors are numerically zero")
    keep = lam > tol_rank * lam[0]
    onb = v @ (w[:, keep] / np.sqrt(lam[keep]))
    return Subspace(k, onb)


@dataclass(frozen=True, eq=False)
class PointwiseConstraintSpec:
    """``M = {f : f(x_i) in W_i}`` for the listed point indices.

    Each ``W_i`` is a ``p x r`` matrix with orthonormal columns (``r = 0`` means
    ``f(x_i) = 0``).
    """

    constraints: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        cleaned = []
        for i, w in self.constraints:
            w = np.asarray(w, dtype=complex)
            if w.ndim != 2:
                raise ShapeError("each W_i must be a p x r matrix")
            if w.shape[1]:
                err = np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1])))
                if err > 1e-12:
                    raise ValueError(f"W for point {i} does not have orthonormal columns "
                                     f"(error {err:.2e})")
            cleaned.append((int(i), w))
        object.__setattr__(self, "constraints", tuple(cleaned))

    @classmethod
    def zeros(cls, indices: Sequence[int], p: int = 1) -> "PointwiseConstraintSpec":
        """``f(x_i) = 0`` at each listed index."""
        return cls(tuple((i, np.zeros((p, 0))) for i in indices))

    @classmethod
    def from_directions(cls, items, p: int) -> "PointwiseConstraintSpec":
        """Build from ``(i, directions)`` pairs, orthonormalizing the directions."""
        out = []
        for i, dirs in items:
            d = np.asarray(dirs, dtype=complex).reshape(-1, p).T if len(dirs) else np.zeros((p, 0))
            out.append((i, orth_columns(d)))
        return cls(tuple(out))


def subspace_from_constraints(k: KernelMatrix, spec: PointwiseConstraintSpec,
                              tol_rank: float = DEFAULT_TOL_RANK) -> Subspace:
    """Orthogonal complement of ``span{K(., x_i) xi : xi orthogonal to W_i}``."""
    p = k.block_dim
    rb = _basis(k, tol_rank)
    c = rb.onb
    rows = []
    for i, w in spec.constraints:
        if not 0 <= i < k.n:
            raise ShapeError(f"constraint point index {i} out of range")
        if w.shape[0] != p:
            raise ShapeError(f"W for point {i} has {w.shape[0]} rows, fiber dimension is {p}")
        # basis of the orthogonal complement of W_i in C^p
        perp = np.eye(p) - w @ w.conj().T
        xi = orth_columns(perp)
        rows.append(xi.conj().T @ c[i * p:(i + 1) * p, :])
    if rows:
        a = np.vstack(rows)
        _, s, vh = np.linalg.svd(a, full_matrices=True)
        r = int(np.count_nonzero(s > 1e-12 * max(1.0, s[0] if s.size else 0.0)))
        z = vh[r:].conj().T
    else:
        z = np.eye(rb.rank, dtype=complex)
    if z.shape[1] == 0:
        raise EmptySubspaceError("the constraints force the zero subspace")
    return Subspace(k, c @ z)


def subspace_kernel(m: Subspace) -> KernelMatrix:
    """Reproducing kernel of ``M``: ``(onb)(onb)^*``."""
    if m.dim == 0:
        raise EmptySubspaceError("subspace is empty")
    return m.ambient.with_entries(hermitian_part(m.onb @ m.onb.conj().T))


def schur_complement_kernel(k: KernelMatrix, zero_indices: Sequence[int]) -> KernelMatrix:
    """Kernel of ``{f : f(x_a) = 0 for a in zero_indices}`` by the projection formula.

    ``K - K[:, A] K[A, A]^{-1} K[A, :]``, an independent route to :func:`subspace_kernel`.
    """
    p = k.block_dim
    idx = np.concatenate([np.arange(a * p, (a + 1) * p) for a in zero_indices])
    e = k.entries
    kaa = e[np.ix_(idx, idx)]
    kxa = e[:, idx]
    return k.with_entries(hermitian_part(e - kxa @ np.linalg.solve(kaa, kxa.conj().T)))


def project(k: KernelMatrix, m: Subspace, f: RkhsElement | np.ndarray,
            tol_rank: float = DEFAULT_TOL_RANK) -> RkhsElement:
    """Orthogonal projection ``P_M f``."""
    vals = f.values if isinstance(f, RkhsElement) else np.asarray(f, dtype=complex)
    vec = vals.reshape(-1)
    rb = _basis(k, tol_rank)
    resid = rb.range_residual(vec[:, None])
    if resid > MEMBERSHIP_TOL:
        raise MembershipError(f"element is outside the sampled space (residual {resid:.3e})",
                              resid)
    inner = m.onb.conj().T @ rb.pinv_apply(vec[:, None])
    return element(k, (m.onb @ inner)[:, 0], tol_rank)


class InvarianceVerdict(NamedTuple):
    verdict: bool
    witness: tuple[int, np.ndarray] | None


def _in_span(q: np.ndarray, v: np.ndarray, tol: float, scale: float) -> bool:
    # relative to the untruncated vector: a truncation that is pure rounding
    # noise must not count as leaving M
    return np.linalg.norm(v - q @ (q.conj().T @ v)) <= tol * scale


def is_pointwise_invariant(k: KernelMatrix, m: Subspace, tol: float = 1e-8
                           ) -> InvarianceVerdict:
    """Is ``M`` mapped into itself by every pointwise truncation ``f -> 1_{x_i} f``?

    On failure the witness is ``(i, values)`` with ``values`` the truncated basis
    function that leaves ``M``.
    """
    p = k.block_dim
    q = orth_columns(m.onb)
    for i in range(k.n):
        for j in range(m.dim):
            t = np.zeros(k.size, dtype=complex)
            t[i * p:(i + 1) * p] = m.onb[i * p:(i + 1) * p, j]
            if not _in_span(q, t, tol, float(np.linalg.norm(m.onb[:, j]))):
                return InvarianceVerdict(False, (i, t.reshape(k.n, p)))
    return InvarianceVerdict(True, None)
