"""Leech factorization ``Psi = Phi Gamma`` with a contractive multiplier ``Gamma``.

The construction is a lurking-isometry argument.  Factor the positive kernel

    P(z, w) = s(z, w) (Phi(z) Phi(w)^* - Psi(z) Psi(w)^*) = H(z) H(w)^*

and the CNP kernel as ``1 - 1/s(z, w) = b(z) b(w)^*``.  Dividing by ``s`` gives

    Phi Phi^* + (H (x) b)(H (x) b)^* = Psi Psi^* + H H^*,

so ``[Phi^*; (H (x) b)^*] xi -> [Psi^*; H^*] xi`` extends to a partial isometry
``V = [[A, B], [C, D]]``.  Solving the second row for ``H^*`` yields the
transfer function

    Gamma(w)^* = A + B W_w (I - D W_w)^{-1} C,   W_w v = v (x) b(w)^*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import hermitian_part, partial_isometry_through, psd_factor
from .beurling import projection_residual, synthesize
from .errors import (
    InternalConsistencyError,
    NoFactorizationError,
    NumericalError,
    RkhsError,
    ShapeError,
    StageError,
    ThreeKernelError,
)
from .kernels import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    CnpFactor,
    KernelMatrix,
    cnp_factor,
    is_psd,
)
from .multcheck import MultiplierSymbol, is_partial_isometry, multiplication_operator
from .samplespace import Subspace, subspace_from_spanning, subspace_kernel

GRAM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LeechResult:
    gamma: MultiplierSymbol
    contractivity_min_eig: float
    factor_residual: float
    gram_residual: float
    defect_rank: int
    cnp_rank: int
    max_e_norm: float

    def to_json(self, include_gamma: bool = True) -> dict:
        out = {"contractivity_min_eig": self.contractivity_min_eig,
               "factor_residual": self.factor_residual,
               "gram_residual": self.gram_residual,
               "defect_rank": self.defect_rank,
               "cnp_rank": self.cnp_rank,
               "max_e_norm": self.max_e_norm,
               "gamma_shape": list(self.gamma.shape)}
        if include_gamma:
            out["gamma"] = self.gamma.to_json()
        return out


def _stack_kernel(s: KernelMatrix, r1: np.ndarray, p: int) -> np.ndarray:
    sb = s.entries if p == 1 else np.kron(s.entries, np.ones((p, p)))
    return sb * (r1 @ r1.conj().T)


def leech_defect(s: KernelMatrix, phi: MultiplierSymbol, psi: MultiplierSymbol
                 ) -> KernelMatrix:
    """``P(x_i, x_j) = s(x_i, x_j) (Phi(x_i) Phi(x_j)^* - Psi(x_i) Psi(x_j)^*)``."""
    if not (s.sample.same_as(phi.sample) and s.sample.same_as(psi.sample)):
        raise ShapeError("kernel and symbols must share one sample set")
    if s.block_dim != 1:
        raise ShapeError("s must be a scalar kernel")
    p = phi.shape[0]
    if psi.shape[0] != p:
        raise ShapeError(f"Phi has {p} output rows but Psi has {psi.shape[0]}")
    a = _stack_kernel(s, phi.stacked(), p) - _stack_kernel(s, psi.stacked(), p)
    return KernelMatrix(hermitian_part(a), s.sample, p)


def contractivity_defect(s: KernelMatrix, gamma: MultiplierSymbol) -> KernelMatrix:
    """``s (I - Gamma Gamma^*)``: the defect of ``Gamma`` as a multiplier of ``H_s``."""
    f = gamma.shape[0]
    eye = np.kron(np.ones((s.n, s.n)), np.eye(f))
    r = gamma.stacked()
    sb = s.entries if f == 1 else np.kron(s.entries, np.ones((f, f)))
    return KernelMatrix(hermitian_part(sb * (eye - r @ r.conj().T)), s.sample, f)


def solve(s: KernelMatrix, phi: MultiplierSymbol, psi: MultiplierSymbol,
          tol_psd: float = DEFAULT_TOL_PSD, tol_rank: float = DEFAULT_TOL_RANK,
          tol: float = 1e-7, cnp: CnpFactor | None = None) -> LeechResult:
    """Contractive ``Gamma`` (blocks ``f x g``) with ``Psi = Phi Gamma`` on the sample."""
    p, f = phi.shape
    g = psi.shape[1]
    pk = leech_defect(s, phi, psi)
    verdict = is_psd(pk, tol_psd)
    if not verdict.verdict:
        raise NoFactorizationError(
            f"s (Phi Phi^* - Psi Psi^*) has eigenvalue {verdict.min_eigenvalue:.6g}; "
            "the range of Psi is not contractively contained in that of Phi",
            verdict.min_eigenvalue)
    b = cnp if cnp is not None else cnp_factor(s, tol_rank, tol_psd)
    scale = max(1.0, float(np.max(np.abs(pk.entries))) if pk.entries.size else 1.0)
    hmat = psd_factor(pk.entries, tol_rank, atol=1e-14 * scale)
    n, h, L = s.n, hmat.shape[1], b.rank
    hblk = hmat.reshape(n, p, h)

    us, vs = [], []
    for i in range(n):
        hb = np.kron(hblk[i], b.row(i))                  # p x hL
        us.append(np.vstack([phi[i].conj().T, hb.conj().T]))   # (f + hL) x p
        vs.append(np.vstack([psi[i].conj().T, hblk[i].conj().T]))  # (g + h) x p
    umat = np.hstack(us)
    vmat = np.hstack(vs)
    gu = umat.conj().T @ umat
    gv = vmat.conj().T @ vmat
    gram_resid = float(np.max(np.abs(gu - gv))) / max(1.0, float(np.max(np.abs(gu))))
    if gram_resid > GRAM_TOL:
        raise InternalConsistencyError(
            f"lurking isometry Gram identity fails by {gram_resid:.3e}", gram_resid)

    v = partial_isometry_through(umat, vmat, tol_rank)
    a, bb = v[:g, :f], v[:g, f:]
    c, d = v[g:, :f], v[g:, f:]
    blocks = np.empty((n, f, g), dtype=complex)
    max_e = 0.0
    for i in range(n):
        ww = np.kron(np.eye(h), b.row(i).conj().T)       # hL x h
        e = d @ ww
        en = float(np.linalg.norm(e, 2)) if e.size else 0.0
        max_e = max(max_e, en)
        if en >= 1.0:
            raise NumericalError(f"I - E_w is not invertible at point {i} (||E_w|| = {en:.6g})")
        if h:
            gstar = a + bb @ ww @ np.linalg.solve(np.eye(h) - e, c)
        else:
            gstar = a
        blocks[i] = gstar.conj().T
    gamma = MultiplierSymbol(blocks, s.sample)

    factor_resid = float(np.max(np.linalg.norm(psi.blocks - phi.blocks @ gamma.blocks,
                                               ord=2, axis=(1, 2))))
    cd = is_psd(contractivity_defect(s, gamma), tol_psd)
    if factor_resid > tol:
        raise InternalConsistencyError(f"Psi - Phi Gamma = {factor_resid:.3e} exceeds {tol:g}",
                                       factor_resid)
    if not cd.verdict:
        raise InternalConsistencyError(
            f"Gamma is not contractive (defect eigenvalue {cd.min_eigenvalue:.3e})",
            -cd.min_eigenvalue)
    return LeechResult(gamma, cd.min_eigenvalue, factor_resid, gram_resid, h, L, max_e)


def contractive_containment_check(k_m: KernelMatrix, k_n: KernelMatrix,
                                  tol: float = DEFAULT_TOL_PSD) -> bool:
    """``k^N <= k^M``: is ``N`` contractively contained in ``M``?"""
    if not k_m.sample.same_as(k_n.sample) or k_m.block_dim != k_n.block_dim:
        raise ShapeError("kernels must share sample and block dimension")
    return is_psd(k_m.entries - k_n.entries, tol).verdict


@dataclass(frozen=True, eq=False)
class PipelineResult:
    phi: MultiplierSymbol
    psi: MultiplierSymbol
    gamma0: MultiplierSymbol
    L_subspace: Subspace
    gamma: MultiplierSymbol
    composite: MultiplierSymbol
    projection_residual: float
    composite_singular_values: np.ndarray
    chain_upper_min_eig: float
    chain_lower_min_eig: float
    partial_isometry_ok: bool
    leech: LeechResult = field(repr=False)

    def to_json(self) -> dict:
        sv = self.composite_singular_values
        return {"rank_phi": self.phi.shape[1], "rank_psi": self.psi.shape[1],
                "gamma0_shape": list(self.gamma0.shape),
                "L_dim": self.L_subspace.dim,
                "gamma_shape": list(self.gamma.shape),
                "projection_residual": self.projection_residual,
                "composite_sv_distance": float(np.max(np.minimum(np.abs(sv), np.abs(sv - 1.0))))
                if sv.size else 0.0,
                "chain_upper_min_eig": self.chain_upper_min_eig,
                "chain_lower_min_eig": self.chain_lower_min_eig,
                "partial_isometry_ok": self.partial_isometry_ok,
                "leech": self.leech.to_json(include_gamma=False)}


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RkhsError as exc:
        raise StageError(name, exc) from exc


def arias_pipeline(k: KernelMatrix, s: KernelMatrix, m: Subspace, n_sub: Subspace,
                   tol_psd: float = DEFAULT_TOL_PSD, tol_rank: float = DEFAULT_TOL_RANK,
                   tol: float = 1e-7, phi: MultiplierSymbol | None = None,
                   ell: KernelMatrix | None = None) -> PipelineResult:
    """Partially isometric ``Gamma`` with ``Phi Gamma`` representing ``N`` inside ``M``.

    Steps: ``Psi`` for ``N``; Leech ``Psi = Phi Gamma_0``; ``L`` = closed range of
    ``M_{Gamma_0}`` in ``H_s (x) C^f``; ``Gamma`` represents ``L``; compose.
    Only the two-kernel case ``ell = k`` is supported.
    """
    if ell is not None and not (ell is k or (ell.sample.same_as(k.sample)
                                             and np.array_equal(ell.entries, k.entries))):
        raise ThreeKernelError(
            "the nested-subspace pipeline needs N and M in the same space; with a third "
            "kernel the conclusion can fail (see the 'counterexample' task)")
    k_m = subspace_kernel(m)
    k_n = subspace_kernel(n_sub)
    if not contractive_containment_check(k_m, k_n, 1e-9):
        raise StageError("containment", ValueError("N is not contained in M"))
    if phi is None:
        phi = _stage("synthesize-M", synthesize, k_m, s, tol_psd, tol_rank).phi
    psi = _stage("synthesize-N", synthesize, k_n, s, tol_psd, tol_rank).phi
    leech = _stage("leech", solve, s, phi, psi, tol_psd, tol_rank, tol)
    gamma0 = leech.gamma
    f, g0 = gamma0.shape

    s_f = s.tensor_identity(f)
    # M_{Gamma_0} applied to the kernel functions s(., x_j) eta of H_s (x) C^{g0}
    span = gamma0.blockdiag() @ s.tensor_identity(g0).entries
    l_sub = _stage("range-L", subspace_from_spanning, s_f, span, tol_rank)
    k_l = subspace_kernel(l_sub)
    gamma = _stage("synthesize-L", synthesize, k_l, s, tol_psd, tol_rank, ambient=s_f).phi
    composite = phi.compose(gamma)

    p = phi.shape[0]
    k_b = k.as_block(p)
    proj = projection_residual(k_b, s, composite, k_n, tol_rank)
    op = multiplication_operator(k_b, s, composite, tol_rank)
    pi_ok = is_partial_isometry(op, tol)

    def s_outer(sym):
        r = sym.stacked()
        sb = s.entries if p == 1 else np.kron(s.entries, np.ones((p, p)))
        return sb * (r @ r.conj().T)

    upper = is_psd(hermitian_part(k_n.entries - s_outer(composite)), 1e-9)
    lower = is_psd(hermitian_part(s_outer(composite) - s_outer(phi.compose(gamma0))), 1e-9)
    return PipelineResult(phi, psi, gamma0, l_sub, gamma, composite, proj,
                          op.singular_values, upper.min_eigenvalue, lower.min_eigenvalue,
                          pi_ok and upper.verdict and lower.verdict, leech)
