"""Kernel catalog, sampled kernel matrices and positivity tests.

A kernel is only ever seen through its values on a finite :class:`SampleSet`.
Positivity, normalization and the complete Nevanlinna-Pick (CNP) property are
therefore finite-sample certificates: a negative verdict is a genuine
disproof, a positive one only says no violation was found on the sample.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._linalg import check_hermitian, eigh_desc, hermitian_part, psd_factor
from .errors import (
    DivisionByZeroError,
    DomainError,
    NormalizationError,
    NotCNPError,
    PreconditionError,
    ShapeError,
)

log = logging.getLogger(__name__)

DEFAULT_TOL_PSD = 1e-10
DEFAULT_TOL_RANK = 1e-10
NORMALIZED_ATOL = 1e-12
VANISHING_ATOL = 1e-14
NEAR_COINCIDENT = 1e-8


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered, pairwise distinct points of ``C^d``.

    ``coords`` has shape ``(n, d)``.  ``base_index`` optionally marks the base
    point ``x0`` used for normalization.
    """

    coords: np.ndarray
    base_index: int | None = None

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ShapeError(f"sample needs shape (n, d) with n, d >= 1, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        n = c.shape[0]
        if self.base_index is not None and not 0 <= self.base_index < n:
            raise ShapeError(f"base_index {self.base_index} out of range for n = {n}")
        if n > 1:
            diff = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
            np.fill_diagonal(diff, np.inf)
            i, j = np.unravel_index(np.argmin(diff), diff.shape)
            if diff[i, j] == 0.0:
                raise ShapeError(f"sample points {i} and {j} coincide")
            if diff[i, j] < NEAR_COINCIDENT:
                log.warning("sample points %d and %d are %.2e apart; Gram matrices "
                            "will be ill-conditioned", i, j, diff[i, j])

    @classmethod
    def from_points(cls, points: Sequence, base_index: int | None = None) -> "SampleSet":
        """Build from scalars (disc points) or length-d sequences (ball points)."""
        rows = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in points]
        return cls(np.array(rows), base_index)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def z(self) -> np.ndarray:
        """Disc coordinates, shape (n,); only meaningful when ``dim == 1``."""
        return self.coords[:, 0]

    def index_of(self, point) -> int:
        p = np.atleast_1d(np.asarray(point, dtype=complex))
        hits = np.flatnonzero(np.all(self.coords == p[None, :], axis=1))
        if hits.size == 0:
            raise KeyError(f"point {point!r} is not in the sample")
        return int(hits[0])

    def same_as(self, other: "SampleSet") -> bool:
        return self is other or (self.coords.shape == other.coords.shape
                                 and bool(np.array_equal(self.coords, other.coords)))

    def __len__(self) -> int:
        return self.n


_VARIANTS = ("szego", "bergman", "power_alpha", "drury_arveson", "constant",
             "coefficient_series", "custom_matrix")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A catalog kernel.

    ``power_alpha`` is ``(1 - z conj(w))^(-alpha)`` (principal branch);
    ``szego`` and ``bergman`` are the cases ``alpha = 1`` and ``alpha = 2``.
    ``coefficient_series`` is ``sum_m c_m (z conj(w))^m``.
    """

    variant: str
    alpha: float | None = None
    d: int | None = None
    weights: tuple[float, ...] | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "power_alpha" and not (self.alpha is not None and self.alpha > 0):
            raise ValueError("power_alpha needs alpha > 0")
        if self.variant == "drury_arveson" and not (self.d is not None and self.d >= 1):
            raise ValueError("drury_arveson needs d >= 1")
        if self.variant == "coefficient_series":
            if not self.weights or any(c < 0 for c in self.weights):
                raise ValueError("coefficient_series needs nonnegative weights")
            object.__setattr__(self, "weights", tuple(float(c) for c in self.weights))
        if self.variant == "custom_matrix":
            if self.matrix is None:
                raise ValueError("custom_matrix needs a matrix")
            m = np.array(self.matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ShapeError(f"custom matrix must be square, got {m.shape}")
            check_hermitian(m, "custom kernel matrix")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @classmethod
    def szego(cls) -> "KernelSpec":
        return cls("szego")

    @classmethod
    def bergman(cls) -> "KernelSpec":
        return cls("bergman")

    @classmethod
    def power_alpha(cls, alpha: float) -> "KernelSpec":
        return cls("power_alpha", alpha=float(alpha))

    @classmethod
    def drury_arveson(cls, d: int) -> "KernelSpec":
        return cls("drury_arveson", d=int(d))

    @classmethod
    def constant(cls) -> "KernelSpec":
        return cls("constant")

    @classmethod
    def coefficient_series(cls, weights) -> "KernelSpec":
        return cls("coefficient_series", weights=tuple(weights))

    @classmethod
    def custom_matrix(cls, matrix) -> "KernelSpec":
        return cls("custom_matrix", matrix=matrix)

    @property
    def power(self) -> float | None:
        """Exponent alpha for the disc power kernels, else None."""
        return {"szego": 1.0, "bergman": 2.0, "power_alpha": self.alpha}.get(self.variant)

    def to_json(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.variant == "power_alpha":
            out["alpha"] = self.alpha
        elif self.variant == "drury_arveson":
            out["d"] = self.d
        elif self.variant == "coefficient_series":
            out["weights"] = list(self.weights)
        elif self.variant == "custom_matrix":
            out["matrix"] = [[[float(x.real), float(x.imag)] for x in row] for row in self.matrix]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "KernelSpec":
        v = obj.get("variant")
        if v == "power_alpha":
            return cls.power_alpha(obj["alpha"])
        if v == "drury_arveson":
            return cls.drury_arveson(obj["d"])
        if v == "coefficient_series":
            return cls.coefficient_series(obj["weights"])
        if v == "custom_matrix":
            rows = [[complex(*e) if isinstance(e, (list, tuple)) else complex(e) for e in row]
                    for row in obj["matrix"]]
            return cls.custom_matrix(np.array(rows))
        return cls(v)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Sampled (block) kernel matrix.

    For ``block_dim = p`` the matrix is ``np x np`` and block ``(i, j)`` is the
    ``p x p`` operator ``K(x_i, x_j)``.
    """

    entries: np.ndarray
    sample: SampleSet
    block_dim: int = 1

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        n = self.sample.n * self.block_dim
        if e.shape != (n, n):
            raise ShapeError(f"kernel matrix must be {n}x{n} for n = {self.sample.n}, "
                             f"p = {self.block_dim}; got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.sample.n

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        p = self.block_dim
        return self.entries[i * p:(i + 1) * p, j * p:(j + 1) * p]

    def tensor_identity(self, q: int) -> "KernelMatrix":
        """``k (x) I_q`` for a scalar kernel."""
        if self.block_dim != 1:
            raise ShapeError("tensor_identity needs a scalar kernel")
        if q == 1:
            return self
        return KernelMatrix(np.kron(self.entries, np.eye(q)), self.sample, q)

    def as_block(self, q: int) -> "KernelMatrix":
        """Return ``self`` if already ``q``-blocked, else expand a scalar kernel."""
        if self.block_dim == q:
            return self
        if self.block_dim == 1:
            return self.tensor_identity(q)
        raise ShapeError(f"kernel has block dimension {self.block_dim}, expected {q}")

    def with_entries(self, entries: np.ndarray) -> "KernelMatrix":
        return KernelMatrix(entries, self.sample, self.block_dim)


def _check_domain(spec: KernelSpec, sample: SampleSet) -> None:
    c = sample.coords
    if spec.variant in ("constant", "custom_matrix"):
        return
    if spec.variant == "drury_arveson":
        if sample.dim != spec.d:
            raise DomainError(f"Drury-Arveson({spec.d}) needs points of C^{spec.d}, "
                              f"got dimension {sample.dim}")
    elif sample.dim != 1:
        raise DomainError(f"{spec.variant} is a disc kernel; got points of C^{sample.dim}")
    norms = np.linalg.norm(c, axis=1)
    bad = np.flatnonzero(norms >= 1.0)
    if bad.size:
        i = int(bad[0])
        pt = tuple(complex(x) for x in c[i])
        raise DomainError(f"point {i} = {pt} lies outside the open unit "
                          f"{'disc' if sample.dim == 1 else 'ball'}", point=pt)


def _power(base: np.ndarray, alpha: float) -> np.ndarray:
    if float(alpha).is_integer():
        return 1.0 / base ** int(alpha)
    return np.exp(-alpha * np.log(base))


def kernel_function(spec: KernelSpec, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate ``k(z_i, w_j)`` for coordinate arrays of shapes (a, d) and (b, d)."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    inner = z @ w.conj().T
    v = spec.variant
    if v == "constant":
        return np.ones(inner.shape, dtype=complex)
    if v == "drury_arveson":
        return 1.0 / (1.0 - inner)
    if v == "coefficient_series":
        out = np.zeros(inner.shape, dtype=complex)
        for c in reversed(spec.weights):
            out = out * inner + c
        return out
    if v == "custom_matrix":
        raise ValueError("custom_matrix kernels have no closed form")
    return _power(1.0 - inner, spec.power)


def evaluate(spec: KernelSpec, sample: SampleSet) -> KernelMatrix:
    """Sampled kernel matrix ``[k(x_i, x_j)]``."""
    if spec.variant == "custom_matrix":
        if spec.matrix.shape[0] != sample.n:
            raise ShapeError(f"custom matrix is {spec.matrix.shape[0]}x"
                             f"{spec.matrix.shape[0]} but the sample has {sample.n} points")
        return KernelMatrix(spec.matrix, sample)
    _check_domain(spec, sample)
    k = kernel_function(spec, sample.coords, sample.coords)
    return KernelMatrix(hermitian_part(k), sample)


class PsdVerdict(NamedTuple):
    verdict: bool
    min_eigenvalue: float


def _entries(k) -> np.ndarray:
    return k.entries if isinstance(k, KernelMatrix) else np.asarray(k, dtype=complex)


def is_psd(k, tol: float = DEFAULT_TOL_PSD) -> PsdVerdict:
    """PSD test with relative floor ``-tol * max(1, lambda_max)``.

    Accepts a :class:`KernelMatrix` or a plain Hermitian array.
    """
    a = _entries(k)
    check_hermitian(a, "kernel matrix")
    if a.size == 0:
        return PsdVerdict(True, 0.0)
    lam = np.linalg.eigvalsh(a)
    lo, hi = float(lam[0]), float(lam[-1])
    return PsdVerdict(lo >= -tol * max(1.0, hi), lo)


def _same_sample(a: KernelMatrix, b: KernelMatrix) -> None:
    if not a.sample.same_as(b.sample):
        raise ShapeError("kernel matrices live on different sample sets")


def _scalar_to_block(s: np.ndarray, p: int) -> np.ndarray:
    return s if p == 1 else np.kron(s, np.ones((p, p)))


def schur_product(k1: KernelMatrix, k2: KernelMatrix) -> KernelMatrix:
    """Entrywise product; a scalar operand scales the blocks of a block operand."""
    _same_sample(k1, k2)
    if k1.block_dim > 1 and k2.block_dim > 1:
        raise ShapeError("at most one operand of a Schur product may be block-valued")
    p = max(k1.block_dim, k2.block_dim)
    a = _scalar_to_block(k1.entries, p) if k1.block_dim == 1 else k1.entries
    b = _scalar_to_block(k2.entries, p) if k2.block_dim == 1 else k2.entries
    return KernelMatrix(hermitian_part(a * b), k1.sample, p)


def hadamard_quotient(k: KernelMatrix, s: KernelMatrix) -> KernelMatrix:
    """Blockwise ``K(x_i, x_j) / s(x_i, x_j)``; positivity is left to the caller."""
    _same_sample(k, s)
    if s.block_dim != 1:
        raise ShapeError("the divisor kernel must be scalar")
    small = np.abs(s.entries) < VANISHING_ATOL
    if small.any():
        i, j = (int(x) for x in np.argwhere(small)[0])
        raise DivisionByZeroError(f"s(x_{i}, x_{j}) vanishes", index=(i, j))
    q = k.entries / _scalar_to_block(s.entries, k.block_dim)
    return KernelMatrix(hermitian_part(q), k.sample, k.block_dim)


def _require_scalar(k: KernelMatrix, what: str) -> None:
    if k.block_dim != 1:
        raise ShapeError(f"{what} needs a scalar kernel")


def is_normalized(k: KernelMatrix, base_index: int) -> bool:
    _require_scalar(k, "is_normalized")
    col = k.entries[:, base_index]
    return bool(np.all(np.abs(col - 1.0) <= NORMALIZED_ATOL))


def normalize(k: KernelMatrix, base_index: int) -> KernelMatrix:
    """``K[i,j] K[b,b] / (K[i,b] K[b,j])``, which is normalized at ``b``."""
    _require_scalar(k, "normalize")
    e = k.entries
    col = e[:, base_index]
    bad = np.flatnonzero(np.abs(col) < VANISHING_ATOL)
    if bad.size:
        raise NormalizationError(f"K[{int(bad[0])}][{base_index}] vanishes; "
                                 "cannot normalize at this base point")
    out = e * e[base_index, base_index] / (col[:, None] * e[base_index, :][None, :])
    return KernelMatrix(hermitian_part(out), k.sample)


class CnpVerdict(NamedTuple):
    verdict: bool
    certificate: float


def _one_minus_inverse(s: KernelMatrix) -> np.ndarray:
    _require_scalar(s, "CNP test")
    e = s.entries
    small = np.abs(e) < VANISHING_ATOL
    if small.any():
        i, j = (int(x) for x in np.argwhere(small)[0])
        raise DivisionByZeroError(f"s(x_{i}, x_{j}) vanishes", index=(i, j))
    return hermitian_part(1.0 - 1.0 / e)


def is_cnp(s: KernelMatrix, base_index: int | None = None,
           tol: float = DEFAULT_TOL_PSD) -> CnpVerdict:
    """Finite-sample CNP certificate: is ``[1 - 1/s(x_i, x_j)]`` PSD?

    If ``base_index`` is given the kernel must be normalized there.  The
    certificate is the smallest eigenvalue of ``[1 - 1/s]``.
    """
    if base_index is not None and not is_normalized(s, base_index):
        raise PreconditionError(f"kernel is not normalized at base index {base_index}")
    verdict = is_psd(_one_minus_inverse(s), tol)
    return CnpVerdict(verdict.verdict, verdict.min_eigenvalue)


@dataclass(frozen=True, eq=False)
class CnpFactor:
    """Rows ``b(x_i)`` with ``b(x_i) b(x_j)^* = 1 - 1/s(x_i, x_j)``.

    ``rows`` has shape ``(n, L)``; ``L = 0`` for the constant kernel.
    """

    rows: np.ndarray
    residual: float

    @property
    def rank(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.rows[i:i + 1, :]


def cnp_factor(s: KernelMatrix, tol_rank: float = DEFAULT_TOL_RANK,
               tol_psd: float = DEFAULT_TOL_PSD) -> CnpFactor:
    """Factor ``1 - 1/s = B B^*`` by truncated eigendecomposition."""
    g = _one_minus_inverse(s)
    verdict = is_psd(g, tol_psd)
    if not verdict.verdict:
        raise NotCNPError(f"1 - 1/s has eigenvalue {verdict.min_eigenvalue:.6g} < 0",
                          verdict.min_eigenvalue)
    b = psd_factor(g, tol_rank, atol=VANISHING_ATOL)
    resid = float(np.linalg.norm(b @ b.conj().T - g))
    norms = np.linalg.norm(b, axis=1)
    if np.any(norms >= 1.0):
        i = int(np.argmax(norms))
        raise NotCNPError(f"|b(x_{i})| = {norms[i]:.6g} is not < 1", float(-norms[i]))
    return CnpFactor(b, resid)


def min_eigenvalue(k) -> float:
    lam, _ = eigh_desc(_entries(k))
    return float(lam[-1]) if lam.size else 0.0


def trace_tolerance(k: KernelMatrix, rel: float = 1e-10) -> float:
    """``rel * trace / max(1, lambda_max)``: a trace-scaled tolerance for :func:`is_psd`."""
    tr = float(np.real(np.trace(k.entries)))
    lam_max = float(np.linalg.eigvalsh(k.entries)[-1])
    return rel * tr / max(1.0, lam_max)


__all__ = [
    "SampleSet", "KernelSpec", "KernelMatrix", "CnpFactor", "PsdVerdict", "CnpVerdict",
    "evaluate", "kernel_function", "is_psd", "schur_product", "hadamard_quotient",
    "is_normalized", "normalize", "is_cnp", "cnp_factor", "min_eigenvalue",
    "trace_tolerance", "DEFAULT_TOL_PSD", "DEFAULT_TOL_RANK",
]
