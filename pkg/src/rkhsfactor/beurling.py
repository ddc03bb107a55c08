"""Partially isometric multipliers representing invariant subspaces.

Given the kernel ``k^M`` of an invariant subspace ``M`` and a CNP kernel ``s``,
the quotient ``Q = k^M / s`` is positive and any factorization
``Q(x_i, x_j) = Phi(x_i) Phi(x_j)^*`` gives a multiplier
``Phi : H_s (x) C^f -> H_k (x) E`` that is co-isometric onto ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from ._linalg import RangeBasis, hermitian_part, orth_columns, pinv_trunc, psd_factor, svd_rank
from .errors import (
    InvarianceViolationError,
    MismatchError,
    RangeError,
    ShapeError,
    VerificationError,
    ZeroSubspaceError,
)
from .kernels import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    KernelMatrix,
    hadamard_quotient,
    is_psd,
)
from .multcheck import (
    MultiplierSymbol,
    classify,
    defect,
    is_partial_isometry,
    multiplication_operator,
)
from .samplespace import Subspace, subspace_kernel

ZERO_QUOTIENT = 1e-14


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    phi: MultiplierSymbol
    rank_f: int
    quotient_min_eig: float
    coisometry_residual: float
    partial_isometry_ok: bool
    quotient_eigenvalues: np.ndarray | None = None

    def to_json(self, include_phi: bool = True) -> dict:
        out = {"rank_f": self.rank_f,
               "quotient_min_eig": self.quotient_min_eig,
               "coisometry_residual": self.coisometry_residual,
               "partial_isometry_ok": self.partial_isometry_ok}
        if include_phi:
            out["phi"] = self.phi.to_json()
        return out


def symbol_from_factor(h: np.ndarray, k_m: KernelMatrix) -> MultiplierSymbol:
    """Split the ``(n p, f)`` factor of ``Q`` into blocks ``Phi(x_i)``."""
    n, p = k_m.n, k_m.block_dim
    return MultiplierSymbol(h.reshape(n, p, h.shape[1]), k_m.sample)


def synthesize(k_m: KernelMatrix, s: KernelMatrix, tol_psd: float = DEFAULT_TOL_PSD,
               tol_rank: float = DEFAULT_TOL_RANK, ambient: KernelMatrix | None = None,
               tol_pi: float = 1e-7) -> FactorizationResult:
    """Build the minimal ``Phi`` with ``k^M / s = Phi Phi^*`` on the sample.

    Columns of ``Phi`` follow the descending eigenvalues of the quotient.  The
    partial-isometry test runs on ``M_Phi`` into ``ambient`` when given, else
    into ``H_{k^M}`` itself.
    """
    q = hadamard_quotient(k_m, s)
    verdict = is_psd(q, tol_psd)
    if not verdict.verdict:
        raise InvarianceViolationError(
            f"k^M / s has eigenvalue {verdict.min_eigenvalue:.6g}; the subspace is not "
            "invariant or s is not a CNP kernel", verdict.min_eigenvalue)
    lam = np.linalg.eigvalsh(q.entries)[::-1]
    scale = max(1.0, float(np.max(np.abs(k_m.entries))))
    if lam[0] <= ZERO_QUOTIENT * scale:
        raise ZeroSubspaceError("k^M / s is numerically zero")
    h = psd_factor(q.entries, tol_rank, atol=ZERO_QUOTIENT * scale)
    phi = symbol_from_factor(h, k_m)
    f = h.shape[1]
    cls = classify(k_m, s, phi, tol_psd)
    fnorm = max(1.0, float(np.linalg.norm(k_m.entries)))
    coiso = cls.defect_norm / fnorm
    target = ambient if ambient is not None else k_m
    try:
        pi_ok = is_partial_isometry(multiplication_operator(target, s, phi, tol_rank), tol_pi)
    except RangeError:
        pi_ok = False
    return FactorizationResult(phi, f, verdict.min_eigenvalue, coiso, pi_ok, lam)


@dataclass(frozen=True)
class RepresentationDiagnostics:
    max_principal_angle: float
    projection_residual: float
    defect_residual: float
    range_dim: int
    subspace_dim: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"max_principal_angle": self.max_principal_angle,
                "projection_residual": self.projection_residual,
                "defect_residual": self.defect_residual,
                "range_dim": self.range_dim, "subspace_dim": self.subspace_dim,
                "ok": self.ok, "failures": list(self.failures)}


def projection_residual(k: KernelMatrix, s: KernelMatrix, phi: MultiplierSymbol,
                        k_m: KernelMatrix, tol_rank: float = DEFAULT_TOL_RANK) -> float:
    """``||M_Phi M_Phi^* - P_M||_2`` computed in orthonormal coordinates of ``H_k``.

    ``M_Phi M_Phi^*`` has kernel ``s Phi Phi^*`` and ``P_M`` has kernel ``k^M``, so
    the operator difference is read off their kernel difference.
    """
    p = phi.shape[0]
    rb = RangeBasis(k.as_block(p).entries, tol_rank)
    t = _s_phi_phi(s, phi) - k_m.entries
    x = rb.operator_coords(t)
    return float(np.linalg.norm(x, 2)) if x.size else 0.0


def _s_phi_phi(s: KernelMatrix, phi: MultiplierSymbol) -> np.ndarray:
    r = phi.stacked()
    p = phi.shape[0]
    sb = s.entries if p == 1 else np.kron(s.entries, np.ones((p, p)))
    return hermitian_part(sb * (r @ r.conj().T))


def verify_representation(result: FactorizationResult | MultiplierSymbol, s: KernelMatrix,
                          k: KernelMatrix, m: Subspace, tol: float = 1e-7,
                          defect_tol: float = 1e-8, tol_rank: float = DEFAULT_TOL_RANK,
                          raise_on_failure: bool = True) -> RepresentationDiagnostics:
    """Check that ``Phi`` represents ``M``.

    1. range of ``M_Phi`` equals ``M`` (principal angles at most ``tol``);
    2. ``M_Phi M_Phi^* = P_M`` to ``tol`` in operator norm;
    3. the defect ``k^M - s Phi Phi^*`` is at most ``defect_tol`` (relative Frobenius).
    """
    phi = result.phi if isinstance(result, FactorizationResult) else result
    p, f = phi.shape
    k_b = k.as_block(p)
    k_m = subspace_kernel(m)
    rb = RangeBasis(k_b.entries, tol_rank)
    op = multiplication_operator(k_b, s.as_block(f), phi, tol_rank)
    u, sv, _ = np.linalg.svd(op.matrix, full_matrices=False)
    rng = u[:, sv > max(tol, tol_rank * (sv[0] if sv.size else 0.0))] if sv.size else u[:, :0]
    m_coords = orth_columns(rb.coords(m.onb))
    failures = []
    if rng.shape[1] != m_coords.shape[1]:
        angle = float(np.pi / 2)
    elif rng.shape[1] == 0:
        angle = 0.0
    else:
        angle = float(np.max(subspace_angles(rng, m_coords)))
    if angle > tol:
        failures.append(f"range of M_Phi differs from M (max principal angle {angle:.3e})")
    proj = projection_residual(k_b, s, phi, k_m, tol_rank)
    if proj > tol:
        failures.append(f"M_Phi M_Phi^* differs from P_M by {proj:.3e}")
    d = defect(k_m, s, phi)
    drel = float(np.linalg.norm(d.entries)) / max(1.0, float(np.linalg.norm(k_m.entries)))
    if drel > defect_tol:
        failures.append(f"defect k^M - s Phi Phi^* is {drel:.3e}")
    diag = RepresentationDiagnostics(angle, proj, drel, rng.shape[1], m_coords.shape[1],
                                     tuple(failures))
    if failures and raise_on_failure:
        raise VerificationError("; ".join(failures), failures, diag)
    return diag


@dataclass(frozen=True, eq=False)
class ConnectingIsometry:
    """``V : C^f -> C^f~`` with ``Phi = Phi~ V`` and ``Phi~ = Phi V^*``.

    ``v`` has shape ``(f~, f)``.
    """

    v: np.ndarray
    is_isometry: bool
    is_partial_isometry: bool
    forward_residual: float
    backward_residual: float

    @property
    def isometry_defect(self) -> float:
        vv = self.v.conj().T @ self.v
        return float(np.linalg.norm(vv - np.eye(vv.shape[0]), 2)) if vv.size else 0.0


def connecting_partial_isometry(phi: MultiplierSymbol, phi_tilde: MultiplierSymbol,
                                tol: float = 1e-8, tol_rank: float = DEFAULT_TOL_RANK
                                ) -> ConnectingIsometry:
    """Map ``Phi(x_i)^* xi -> Phi~(x_i)^* xi`` and extend by zero."""
    if not phi.sample.same_as(phi_tilde.sample) or phi.shape[0] != phi_tilde.shape[0]:
        raise ShapeError("symbols must share sample and output dimension")
    g = phi.adjoint_span_matrix()
    gt = phi_tilde.adjoint_span_matrix()
    mismatch = float(np.max(np.abs(g.conj().T @ g - gt.conj().T @ gt))) if g.size else 0.0
    if mismatch > 1e-8:
        raise MismatchError(f"Phi Phi^* and Phi~ Phi~^* differ by {mismatch:.3e}", mismatch)
    v = gt @ pinv_trunc(g, tol_rank)
    fwd = float(np.max(np.abs(phi.stacked() - phi_tilde.stacked() @ v))) if v.size else 0.0
    bwd = float(np.max(np.abs(phi_tilde.stacked() - phi.stacked() @ v.conj().T))) \
        if v.size else 0.0
    vv = v.conj().T @ v
    ev = np.linalg.eigvalsh(hermitian_part(vv)) if vv.size else np.zeros(0)
    partial = bool(np.all(np.minimum(np.abs(ev), np.abs(ev - 1.0)) <= tol))
    iso = bool(vv.size == 0 or np.linalg.norm(vv - np.eye(vv.shape[0]), 2) <= tol)
    return ConnectingIsometry(v, iso, partial, fwd, bwd)


def is_minimal(phi: MultiplierSymbol, tol_rank: float = DEFAULT_TOL_RANK) -> bool:
    """Do the vectors ``Phi(x_i)^* xi`` span all of ``C^f``?"""
    g = phi.adjoint_span_matrix()
    f = g.shape[0]
    if f == 0:
        return True
    return svd_rank(np.linalg.svd(g, compute_uv=False), tol_rank) == f


def gauge_align(phi: MultiplierSymbol) -> MultiplierSymbol:
    """Fix the unimodular gauge of a ``p x 1`` symbol: first nonzero entry made positive."""
    if phi.shape[1] != 1:
        raise ShapeError("gauge alignment is defined for single-column symbols")
    flat = phi.stacked()[:, 0]
    nz = np.flatnonzero(np.abs(flat) > 1e-12 * max(1.0, np.max(np.abs(flat))))
    if nz.size == 0:
        return phi
    w = flat[nz[0]]
    return phi.scaled(abs(w) / w)
