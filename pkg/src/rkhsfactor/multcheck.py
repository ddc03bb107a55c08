"""Multiplier tests through defect kernels.

For kernels ``E`` (source, ``q x q`` blocks) and ``F`` (target, ``p x p`` blocks)
and a symbol ``Phi(x_i)`` of shape ``p x q``, the defect kernel is

    L(x_i, x_j) = F(x_i, x_j) - Phi(x_i) E(x_i, x_j) Phi(x_j)^*.

``Phi`` is a contractive multiplier ``H_E -> H_F`` iff ``L >= 0`` and a
co-isometric one iff ``L = 0``.  Scalar kernels passed where a block kernel is
expected are read as ``k (x) I``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ._linalg import RangeBasis, hermitian_part
from .errors import RangeError, ShapeError
from .kernels import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    KernelMatrix,
    KernelSpec,
    SampleSet,
    evaluate,
    hadamard_quotient,
    is_psd,
)

log = logging.getLogger(__name__)

RANGE_TOL = 1e-8
COISOMETRY_CROSSCHECK = 1e-7


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Pointwise values ``Phi(x_i)``; ``blocks`` has shape ``(n, p, q)``."""

    blocks: np.ndarray
    sample: SampleSet

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        if b.ndim == 1:
            b = b[:, None, None]
        if b.ndim != 3 or b.shape[0] != self.sample.n:
            raise ShapeError(f"symbol needs shape (n, p, q) with n = {self.sample.n}, "
                             f"got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocks.shape[1], self.blocks.shape[2]

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.blocks[i]

    @classmethod
    def from_function(cls, sample: SampleSet, fn: Callable) -> "MultiplierSymbol":
        """Evaluate ``fn(point_coords)`` at every sample point."""
        vals = [np.atleast_2d(np.asarray(fn(c if sample.dim > 1 else c[0]), dtype=complex))
                for c in sample.coords]
        return cls(np.array(vals), sample)

    @classmethod
    def constant(cls, sample: SampleSet, value) -> "MultiplierSymbol":
        v = np.atleast_2d(np.asarray(value, dtype=complex))
        return cls(np.broadcast_to(v, (sample.n,) + v.shape).copy(), sample)

    def stacked(self) -> np.ndarray:
        """Rows stacked point by point: shape ``(n p, q)``."""
        n, p, q = self.blocks.shape
        return self.blocks.reshape(n * p, q)

    def blockdiag(self) -> np.ndarray:
        """Block-diagonal ``(n p, n q)`` matrix acting on value vectors."""
        n, p, q = self.blocks.shape
        out = np.zeros((n * p, n * q), dtype=complex)
        for i in range(n):
            out[i * p:(i + 1) * p, i * q:(i + 1) * q] = self.blocks[i]
        return out

    def adjoint_span_matrix(self) -> np.ndarray:
        """``[Phi(x_1)^* ... Phi(x_n)^*]``, shape ``(q, n p)``."""
        return self.stacked().conj().T

    def compose(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        """Pointwise product ``Phi(x) Gamma(x)``."""
        if not self.sample.same_as(other.sample):
            raise ShapeError("symbols live on different samples")
        if self.shape[1] != other.shape[0]:
            raise ShapeError(f"cannot compose {self.shape} with {other.shape}")
        return MultiplierSymbol(self.blocks @ other.blocks, self.sample)

    def scaled(self, c: complex) -> "MultiplierSymbol":
        return MultiplierSymbol(c * self.blocks, self.sample)

    def pad_columns(self, extra: int = 1) -> "MultiplierSymbol":
        n, p, q = self.blocks.shape
        return MultiplierSymbol(np.concatenate([self.blocks, np.zeros((n, p, extra))], axis=2),
                                self.sample)

    def to_json(self) -> dict:
        p, q = self.shape
        return {"shape": [p, q],
                "blocks": [[[float(x.real), float(x.imag)] for x in blk.reshape(-1)]
                           for blk in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict, sample: SampleSet) -> "MultiplierSymbol":
        p, q = obj["shape"]
        blocks = []
        for blk in obj["blocks"]:
            flat = [complex(*e) if isinstance(e, (list, tuple)) else complex(e) for e in blk]
            if len(flat) != p * q:
                raise ShapeError(f"block has {len(flat)} entries, expected {p * q}")
            blocks.append(np.array(flat).reshape(p, q))
        return cls(np.array(blocks).reshape(len(blocks), p, q), sample)


def blaschke(a: complex) -> Callable[[complex], complex]:
    """Disc automorphism ``b_a(z) = (z - a) / (1 - conj(a) z)``."""
    a = complex(a)
    return lambda z: (z - a) / (1 - a.conjugate() * z)


def blaschke_symbol(sample: SampleSet, zeros) -> MultiplierSymbol:
    """Scalar Blaschke product with the given zeros as a 1x1 symbol."""
    z = sample.z
    vals = np.ones(sample.n, dtype=complex)
    for a in zeros:
        vals = vals * blaschke(a)(z)
    return MultiplierSymbol(vals[:, None, None], sample)


def _conform(f_kernel: KernelMatrix, e_kernel: KernelMatrix, phi: MultiplierSymbol
             ) -> tuple[KernelMatrix, KernelMatrix]:
    if not (f_kernel.sample.same_as(e_kernel.sample) and f_kernel.sample.same_as(phi.sample)):
        raise ShapeError("kernels and symbol must share one sample set")
    p, q = phi.shape
    return f_kernel.as_block(p), e_kernel.as_block(q)


def _phi_e_phi(e_kernel: KernelMatrix, phi: MultiplierSymbol) -> np.ndarray:
    d = phi.blockdiag()
    return d @ e_kernel.entries @ d.conj().T


def defect(f_kernel: KernelMatrix, e_kernel: KernelMatrix, phi: MultiplierSymbol
           ) -> KernelMatrix:
    """``L = F - Phi E Phi^*`` blockwise."""
    f_kernel, e_kernel = _conform(f_kernel, e_kernel, phi)
    return f_kernel.with_entries(hermitian_part(f_kernel.entries - _phi_e_phi(e_kernel, phi)))


class Classification(NamedTuple):
    contractive: bool
    coisometric: bool
    min_eigenvalue: float
    defect_norm: float


def classify(f_kernel: KernelMatrix, e_kernel: KernelMatrix, phi: MultiplierSymbol,
             tol: float = DEFAULT_TOL_PSD) -> Classification:
    """Contractive iff ``L >= 0``; co-isometric iff ``||L||_F <= tol ||F||_F``."""
    lk = defect(f_kernel, e_kernel, phi)
    verdict = is_psd(lk, tol)
    fnorm = float(np.linalg.norm(f_kernel.as_block(phi.shape[0]).entries))
    lnorm = float(np.linalg.norm(lk.entries))
    return Classification(verdict.verdict, lnorm <= tol * fnorm, verdict.min_eigenvalue, lnorm)


@dataclass(frozen=True, eq=False)
class MultOpMatrix:
    """Matrix of ``M_Phi`` between orthonormal bases of the sampled spaces."""

    matrix: np.ndarray
    singular_values: np.ndarray
    range_residual: float = 0.0

    @property
    def norm(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0


def multiplication_operator(f_kernel: KernelMatrix, e_kernel: KernelMatrix,
                            phi: MultiplierSymbol, tol_rank: float = DEFAULT_TOL_RANK
                            ) -> MultOpMatrix:
    """``A = C_F^+ D_Phi C_E`` where ``C`` are orthonormal-basis value matrices."""
    f_kernel, e_kernel = _conform(f_kernel, e_kernel, phi)
    src = RangeBasis(e_kernel.entries, tol_rank)
    tgt = RangeBasis(f_kernel.entries, tol_rank)
    image = phi.blockdiag() @ src.onb
    resid = tgt.range_residual(image)
    if resid > RANGE_TOL:
        raise RangeError(f"Phi maps outside the target space (residual {resid:.3e})", resid)
    a = tgt.coords(image)
    sv = np.linalg.svd(a, compute_uv=False) if a.size else np.zeros(0)
    return MultOpMatrix(a, sv, resid)


def is_partial_isometry(op: MultOpMatrix | np.ndarray, tol: float = 1e-7) -> bool:
    """Every singular value within ``tol`` of 0 or 1."""
    sv = op.singular_values if isinstance(op, MultOpMatrix) else np.linalg.svd(
        np.asarray(op), compute_uv=False)
    return bool(np.all(np.minimum(np.abs(sv), np.abs(sv - 1.0)) <= tol))


def coisometry_crosscheck(f_kernel: KernelMatrix, e_kernel: KernelMatrix,
                          phi: MultiplierSymbol, tol: float = 1e-8) -> dict:
    """Test co-isometry twice: ``L = 0`` and ``A A^* = I`` on the target.

    Returns both residuals and a ``flag`` set when they disagree by more than
    1e-7 (a sign of ill-conditioning in the orthonormal bases).
    """
    lk = defect(f_kernel, e_kernel, phi)
    fn = max(1.0, float(np.linalg.norm(f_kernel.as_block(phi.shape[0]).entries)))
    defect_rel = float(np.linalg.norm(lk.entries)) / fn
    op = multiplication_operator(f_kernel, e_kernel, phi)
    aa = op.matrix @ op.matrix.conj().T
    op_resid = float(np.linalg.norm(aa - np.eye(aa.shape[0]), 2)) if aa.size else 0.0
    by_defect = defect_rel <= tol
    by_operator = op_resid <= tol
    flag = by_defect != by_operator and abs(defect_rel - op_resid) > COISOMETRY_CROSSCHECK
    if flag:
        log.warning("co-isometry tests disagree: defect %.3e vs operator %.3e",
                    defect_rel, op_resid)
    return {"defect_residual": defect_rel, "operator_residual": op_resid,
            "coisometric": by_defect and by_operator, "flag": flag}


def _psd_ok(a: np.ndarray, eps: float = 1e-13) -> bool:
    lam = np.linalg.eigvalsh(a)
    scale = max(abs(lam[0]), abs(lam[-1]), 1e-300)
    return lam[0] >= -eps * scale


def multiplier_norm(f_kernel: KernelMatrix, e_kernel: KernelMatrix, phi: MultiplierSymbol,
                    atol: float = 1e-8, max_iter: int = 60) -> float:
    """Smallest ``t >= 0`` with ``t^2 F - Phi E Phi^* >= 0``, by bisection."""
    f_kernel, e_kernel = _conform(f_kernel, e_kernel, phi)
    x = hermitian_part(_phi_e_phi(e_kernel, phi))
    if not np.any(x):
        return 0.0
    sup = float(np.max(np.linalg.norm(phi.blocks, ord=2, axis=(1, 2))))
    lam_e = float(np.linalg.eigvalsh(e_kernel.entries)[-1])
    lam_f = np.linalg.eigvalsh(f_kernel.entries)
    pos = lam_f[lam_f > DEFAULT_TOL_RANK * lam_f[-1]]
    hi = sup * np.sqrt(max(lam_e, 0.0) / pos[0]) if pos.size else 0.0
    hi = max(hi, 1e-300)
    f = f_kernel.entries
    if not _psd_ok(hi * hi * f - x):
        # bracket fails only when F is singular on part of the range of Phi E Phi^*
        while not _psd_ok(hi * hi * f - x) and hi < 1e150:
            hi *= 2.0
    lo = 0.0
    for _ in range(max_iter):
        if hi - lo <= atol:
            break
        mid = 0.5 * (lo + hi)
        if _psd_ok(mid * mid * f - x):
            hi = mid
        else:
            lo = mid
    return float(hi)


def row_symbol(sample: SampleSet) -> MultiplierSymbol:
    """``Phi(z) = (z_1, ..., z_d)`` as a ``1 x d`` symbol."""
    return MultiplierSymbol(sample.coords[:, None, :], sample)


def row_contraction_check(k: KernelMatrix, d: int | None = None,
                          tol: float = DEFAULT_TOL_PSD) -> bool:
    """Do ``z_1, ..., z_d`` form a row contraction on the sampled ``H_k``?"""
    sample = k.sample
    if d is not None and d != sample.dim:
        raise ShapeError(f"sample points live in C^{sample.dim}, not C^{d}")
    phi = row_symbol(sample)
    verdict = classify(k, k, phi, tol).contractive
    quotient = hadamard_quotient(k, evaluate(KernelSpec.drury_arveson(sample.dim), sample))
    cross = is_psd(quotient, tol).verdict
    if cross != verdict:
        log.warning("row contraction verdict %s disagrees with k / s_DA test %s", verdict, cross)
    return verdict


def sup_rank(phi: MultiplierSymbol, tol_rank: float = DEFAULT_TOL_RANK) -> int:
    """Largest numerical rank of ``Phi(x_i)`` over the sample.

    A singular value counts when ``sigma^2 > tol_rank * sigma_max^2``, with
    ``sigma_max`` taken over all points.
    """
    if phi.blocks.size == 0:
        return 0
    sv = np.linalg.svd(phi.blocks, compute_uv=False)
    top = float(sv.max()) if sv.size else 0.0
    if top == 0.0:
        return 0
    return int(np.max(np.count_nonzero(sv * sv > tol_rank * top * top, axis=1)))


def pointwise_bound_violation(k: KernelMatrix, s: KernelMatrix, phi: MultiplierSymbol
                              ) -> float:
    """``max_i ||Phi(x_i)||^2 - k(x_i, x_i) / s(x_i, x_i)``; nonpositive for contractions."""
    norms = np.linalg.norm(phi.blocks, ord=2, axis=(1, 2)) ** 2
    ratio = np.real(np.diag(k.entries)) / np.real(np.diag(s.entries))
    return float(np.max(norms - ratio))
