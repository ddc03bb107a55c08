import numpy as np
import pytest
from scipy.stats import unitary_group

from rkhsfactor.beurling import (
    connecting_partial_isometry,
    gauge_align,
    is_minimal,
    projection_residual,
    synthesize,
    verify_representation,
)
from rkhsfactor.errors import InvarianceViolationError, MismatchError, VerificationError
from rkhsfactor.kernels import KernelSpec, SampleSet, evaluate
from rkhsfactor.multcheck import MultiplierSymbol, blaschke, is_partial_isometry, \
    multiplication_operator
from rkhsfactor.samplespace import (
    PointwiseConstraintSpec,
    subspace_from_constraints,
    subspace_from_spanning,
    subspace_kernel,
    whole_space,
)
from rkhsfactor.sampling import uniform_disc


def _zero_model(kspec, sspec, sample, zero_idx):
    k = evaluate(kspec, sample)
    s = evaluate(sspec, sample)
    m = subspace_from_constraints(k, PointwiseConstraintSpec.zeros(zero_idx))
    return k, s, m


def test_whole_hardy_space_gives_constant_symbol():
    sample = uniform_disc(6, seed=1, radius=0.9)
    s = evaluate(KernelSpec.szego(), sample)
    res = synthesize(subspace_kernel(whole_space(s)), s)
    assert res.rank_f == 1
    np.testing.assert_allclose(np.abs(res.phi.blocks[:, 0, 0]), 1.0, atol=1e-9)


def test_hardy_one_zero_on_fixed_points_matches_blaschke():
    sample = SampleSet.from_points([0, 0.3, 0.7, -0.4, 0.5])
    k, s, m = _zero_model(KernelSpec.szego(), KernelSpec.szego(), sample, [4])
    res = synthesize(subspace_kernel(m), s)
    assert res.rank_f == 1
    b = blaschke(0.5)(sample.z)
    phi = res.phi.blocks[:, 0, 0]
    omega = phi[0] / b[0]
    assert abs(abs(omega) - 1) <= 1e-8
    assert np.max(np.abs(phi - omega * b)) <= 1e-8


def test_bergman_quotient_rank_exceeds_one():
    sample = uniform_disc(6, seed=4, radius=0.9, extra=[0.5])
    k, s, m = _zero_model(KernelSpec.bergman(), KernelSpec.szego(), sample, [6])
    k_m = subspace_kernel(m)
    res = synthesize(k_m, s)
    q = k_m.entries / s.entries
    sv = np.linalg.svd(q, compute_uv=False)
    assert res.rank_f == int(np.sum(sv > 1e-10 * sv[0]))
    assert res.rank_f >= 2


def test_verify_representation_hardy(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    res = synthesize(subspace_kernel(m), s, ambient=s)
    assert res.partial_isometry_ok
    diag = verify_representation(res, s, s, m)
    assert diag.ok and diag.projection_residual <= 1e-8


def test_verify_detects_scaled_symbol(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    res = synthesize(subspace_kernel(m), s)
    with pytest.raises(VerificationError) as info:
        verify_representation(res.phi.scaled(0.5), s, s, m)
    assert any("P_M" in f for f in info.value.failures)


def test_verify_accepts_padded_symbol(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    res = synthesize(subspace_kernel(m), s)
    assert verify_representation(res.phi.pad_columns(1), s, s, m).ok


def test_non_invariant_subspace_rejected():
    sample = uniform_disc(5, seed=2, radius=0.8)
    s = evaluate(KernelSpec.szego(), sample)
    # span of a single kernel function is not invariant under multiplication by z
    m = subspace_from_spanning(s, [s.entries[:, 0]])
    with pytest.raises(InvarianceViolationError) as info:
        synthesize(subspace_kernel(m), s)
    assert info.value.min_eigenvalue < 0


def test_connecting_isometry_for_unitary_gauge(hardy_one_zero):
    sample = uniform_disc(6, seed=4, radius=0.9, extra=[0.5])
    k, s, m = _zero_model(KernelSpec.bergman(), KernelSpec.szego(), sample, [6])
    phi = synthesize(subspace_kernel(m), s).phi
    f = phi.shape[1]
    u = unitary_group.rvs(f, random_state=3)
    rotated = MultiplierSymbol(phi.blocks @ u.conj().T, sample)
    conn = connecting_partial_isometry(phi, rotated)
    # V maps Phi(x)^* xi to U Phi(x)^* xi; minimal Phi spans C^f so V = U
    np.testing.assert_allclose(conn.v, u, atol=1e-8)
    assert conn.is_isometry


def test_connecting_isometry_for_padding():
    sample = uniform_disc(6, seed=5, radius=0.9, extra=[0.3])
    k, s, m = _zero_model(KernelSpec.bergman(), KernelSpec.szego(), sample, [6])
    phi = synthesize(subspace_kernel(m), s).phi
    conn = connecting_partial_isometry(phi, phi.pad_columns(1))
    f = phi.shape[1]
    assert conn.v.shape == (f + 1, f)
    np.testing.assert_allclose(conn.v, np.eye(f + 1, f), atol=1e-8)
    assert conn.isometry_defect <= 1e-8
    assert conn.forward_residual <= 1e-8 and conn.backward_residual <= 1e-8


def test_connecting_isometry_between_two_factorizations():
    sample = uniform_disc(7, seed=6, radius=0.9, extra=[-0.2])
    k, s, m = _zero_model(KernelSpec.bergman(), KernelSpec.szego(), sample, [7])
    k_m = subspace_kernel(m)
    phi = synthesize(k_m, s).phi
    # an independent factorization: reversed eigenvalue order
    q = k_m.entries / s.entries
    lam, u = np.linalg.eigh(0.5 * (q + q.conj().T))
    keep = lam > 1e-10 * lam[-1]
    h = u[:, keep] * np.sqrt(lam[keep])
    other = MultiplierSymbol(h[:, None, :], sample)
    conn = connecting_partial_isometry(phi, other)
    assert conn.forward_residual <= 1e-8 and conn.backward_residual <= 1e-8
    assert conn.is_isometry


def test_mismatch_error():
    sample = uniform_disc(4, seed=1, radius=0.8)
    a = MultiplierSymbol.constant(sample, 1.0)
    with pytest.raises(MismatchError):
        connecting_partial_isometry(a, a.scaled(2.0))


def test_minimality(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    phi = synthesize(subspace_kernel(m), s).phi
    assert is_minimal(phi)
    assert not is_minimal(phi.pad_columns(1))
    assert is_minimal(MultiplierSymbol.constant(sample, 1.0))


def test_synthesized_symbol_is_partial_isometry():
    sample = uniform_disc(6, seed=2, radius=0.9, extra=[0.3, -0.5])
    k, s, m = _zero_model(KernelSpec.bergman(), KernelSpec.szego(), sample, [6, 7])
    res = synthesize(subspace_kernel(m), s, ambient=k)
    assert res.partial_isometry_ok
    assert is_partial_isometry(multiplication_operator(k, s, res.phi), 1e-7)
    assert projection_residual(k, s, res.phi, subspace_kernel(m)) <= 1e-7


def test_gauge_align_fixes_phase(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    phi = gauge_align(synthesize(subspace_kernel(m), s).phi)
    first = phi.stacked()[0, 0]
    assert abs(first.imag) < 1e-14 and first.real > 0


def test_result_json_has_residuals(hardy_one_zero):
    sample, s = hardy_one_zero
    m = subspace_from_constraints(s, PointwiseConstraintSpec.zeros([8]))
    out = synthesize(subspace_kernel(m), s).to_json()
    assert out["rank_f"] == 1 and "coisometry_residual" in out and "phi" in out
