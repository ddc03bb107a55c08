"""Dense Hermitian helpers shared by the public modules."""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

HERMITIAN_RTOL = 1e-12


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def check_hermitian(a: np.ndarray, what: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"{what} must be square, got shape {a.shape}")
    if a.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(a))))
    err = float(np.max(np.abs(a - a.conj().T)))
    if err > HERMITIAN_RTOL * scale:
        raise ContractViolation(f"{what} is not Hermitian (max asymmetry {err:.3e})")


def eigh_desc(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues in descending order."""
    lam, u = np.linalg.eigh(hermitian_part(a))
    return lam[::-1], u[:, ::-1]


def rank_cutoff(lam: np.ndarray, tol_rank: float, atol: float = 0.0) -> int:
    """Number of leading (descending) eigenvalues above ``max(tol_rank*lam_max, atol)``."""
    if lam.size == 0 or lam[0] <= 0.0:
        return 0
    cut = max(tol_rank * lam[0], atol)
    return int(np.count_nonzero(lam > cut))


def psd_factor(a: np.ndarray, tol_rank: float = 1e-10, atol: float = 0.0) -> np.ndarray:
    """Return ``F`` with ``a ~= F F*``, columns ordered by descending eigenvalue.

    Eigenvalues at or below ``max(tol_rank * lam_max, atol)`` are dropped, so the
    number of columns is the numerical rank of ``a``.
    """
    lam, u = eigh_desc(a)
    r = rank_cutoff(lam, tol_rank, atol)
    return u[:, :r] * np.sqrt(lam[:r])


class RangeBasis:
    """Truncated spectral data of a PSD kernel matrix ``K = U diag(lam) U*``.

    ``onb`` holds the value vectors ``U sqrt(lam)`` of an orthonormal basis of the
    sampled RKHS; ``coords`` maps value vectors to coordinates in that basis.
    """

    def __init__(self, k: np.ndarray, tol_rank: float = 1e-10):
        lam, u = eigh_desc(k)
        r = rank_cutoff(lam, tol_rank)
        self.lam = lam[:r]
        self.u = u[:, :r]
        self.rank = r
        self.lam_all = lam

    @property
    def onb(self) -> np.ndarray:
        return self.u * np.sqrt(self.lam)

    def coords(self, values: np.ndarray) -> np.ndarray:
        return (self.u.conj().T @ values) / np.sqrt(self.lam)[:, None]

    def range_residual(self, values: np.ndarray) -> float:
        """Relative Euclidean distance of ``values`` columns from ``range(K)``."""
        if values.size == 0:
            return 0.0
        resid = values - self.u @ (self.u.conj().T @ values)
        return float(np.linalg.norm(resid) / max(1.0, np.linalg.norm(values)))

    def pinv_apply(self, values: np.ndarray) -> np.ndarray:
        """``K^+ values`` with the truncated spectrum."""
        return self.u @ ((self.u.conj().T @ values) / self.lam[:, None])

    def operator_coords(self, t: np.ndarray) -> np.ndarray:
        """Matrix in ON coordinates of the operator ``X`` with ``X K = t``."""
        w = self.u.conj().T @ t @ self.u
        d = 1.0 / np.sqrt(self.lam)
        return hermitian_part(d[:, None] * w * d[None, :])

    @property
    def condition(self) -> float:
        if self.lam_all.size == 0 or self.lam_all[-1] <= 0.0:
            return float("inf")
        return float(self.lam_all[0] / self.lam_all[-1])


def orth_columns(a: np.ndarray, tol_rank: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the column space of ``a`` (relative SVD cutoff)."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    return u[:, s > tol_rank * s[0]]


def svd_rank(s: np.ndarray, tol_rank: float) -> int:
    """Singular values kept under the eigenvalue convention ``s^2 > tol_rank * s_max^2``."""
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s * s > tol_rank * s[0] * s[0]))


def pinv_trunc(a: np.ndarray, tol_rank: float = 1e-10) -> np.ndarray:
    """Pseudo-inverse keeping singular values with ``s^2 > tol_rank * s_max^2``."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    r = svd_rank(s, tol_rank)
    if r == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.result_type(a, complex))
    return (vh[:r].conj().T / s[:r]) @ u[:, :r].conj().T


def partial_isometry_through(src: np.ndarray, dst: np.ndarray, tol_rank: float = 1e-10
                             ) -> np.ndarray:
    """Partial isometry ``V`` with ``V src ~= dst``, zero off the column span of ``src``.

    On the span, ``V`` is the unitary polar factor of ``dst src^+``, so it is an
    exact partial isometry even when the Gram matrices of ``src`` and ``dst``
    agree only approximately.
    """
    u, s, vh = np.linalg.svd(src, full_matrices=False)
    r = svd_rank(s, tol_rank)
    if r == 0:
        return np.zeros((dst.shape[0], src.shape[0]), dtype=complex)
    x = dst @ (vh[:r].conj().T / s[:r])              # images of the span's ON basis
    wu, _, wvh = np.linalg.svd(x, full_matrices=False)
    return (wu @ wvh) @ u[:, :r].conj().T
