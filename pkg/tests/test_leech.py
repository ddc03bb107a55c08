import numpy as np
import pytest

from rkhsfactor.beurling import synthesize
from rkhsfactor.errors import NoFactorizationError, StageError, ThreeKernelError
from rkhsfactor.kernels import KernelSpec, evaluate, is_psd
from rkhsfactor.leech import (
    arias_pipeline,
    contractive_containment_check,
    contractivity_defect,
    leech_defect,
    solve,
)
from rkhsfactor.multcheck import MultiplierSymbol, blaschke_symbol, is_partial_isometry
from rkhsfactor.samplespace import PointwiseConstraintSpec, subspace_from_constraints, \
    subspace_kernel
from rkhsfactor.sampling import uniform_disc


def nested(kspec, n=8, seed=2):
    sample = uniform_disc(n, seed=seed, radius=0.9, extra=[0.3, -0.5])
    k = evaluate(kspec, sample)
    s = evaluate(KernelSpec.szego(), sample)
    m = subspace_from_constraints(k, PointwiseConstraintSpec.zeros([n]))
    nn = subspace_from_constraints(k, PointwiseConstraintSpec.zeros([n, n + 1]))
    return sample, k, s, m, nn


def test_leech_defect_trivial_cases():
    sample, k, s, m, _ = nested(KernelSpec.szego())
    phi = blaschke_symbol(sample, [0.3])
    np.testing.assert_allclose(leech_defect(s, phi, phi).entries, 0, atol=1e-15)
    zero = MultiplierSymbol.constant(sample, 0)
    r = phi.stacked()
    np.testing.assert_allclose(leech_defect(s, phi, zero).entries,
                               s.entries * (r @ r.conj().T), atol=1e-14)


def test_blaschke_containment_defect_psd():
    sample, *_ = nested(KernelSpec.szego(), n=10)
    s = evaluate(KernelSpec.szego(), sample)
    assert is_psd(leech_defect(s, blaschke_symbol(sample, [0.3]),
                               blaschke_symbol(sample, [0.3, -0.5])), 1e-9).verdict


def test_equal_symbols_give_unimodular_gamma():
    sample = uniform_disc(6, seed=3, radius=0.8)
    s = evaluate(KernelSpec.szego(), sample)
    phi = MultiplierSymbol(np.exp(sample.z)[:, None, None], sample)
    res = solve(s, phi, phi)
    np.testing.assert_allclose(np.abs(res.gamma.blocks[:, 0, 0]), 1.0, atol=1e-10)
    assert res.factor_residual <= 1e-10


def test_hardy_blaschke_quotient():
    sample, *_ = nested(KernelSpec.szego(), n=10, seed=6)
    s = evaluate(KernelSpec.szego(), sample)
    res = solve(s, blaschke_symbol(sample, [0.3]), blaschke_symbol(sample, [0.3, -0.5]))
    ref = np.abs(blaschke_symbol(sample, [-0.5]).blocks[:, 0, 0])
    np.testing.assert_allclose(np.abs(res.gamma.blocks[:, 0, 0]), ref, atol=1e-7)
    assert res.gram_residual <= 1e-8


def test_bergman_nested_solve_is_certified():
    sample, k, s, m, nn = nested(KernelSpec.bergman())
    phi = synthesize(subspace_kernel(m), s).phi
    psi = synthesize(subspace_kernel(nn), s).phi
    res = solve(s, phi, psi)
    assert res.contractivity_min_eig >= -1e-9
    assert res.factor_residual <= 1e-7
    # independent check of contractivity: s (I - Gamma Gamma^*) >= 0
    assert is_psd(contractivity_defect(s, res.gamma), 1e-9).verdict
    np.testing.assert_allclose(phi.compose(res.gamma).blocks, psi.blocks, atol=1e-7)


def test_no_factorization_when_not_contained():
    sample, k, s, m, nn = nested(KernelSpec.szego())
    with pytest.raises(NoFactorizationError) as info:
        solve(s, blaschke_symbol(sample, [0.3, -0.5]), blaschke_symbol(sample, [0.3]))
    assert info.value.min_eigenvalue < 0


def test_containment_examples():
    sample, k, s, m, nn = nested(KernelSpec.bergman())
    km, kn = subspace_kernel(m), subspace_kernel(nn)
    assert contractive_containment_check(km, km)
    assert contractive_containment_check(km, kn)
    assert not contractive_containment_check(kn, km)


def test_pipeline_n_equals_m():
    sample, k, s, m, _ = nested(KernelSpec.szego())
    res = arias_pipeline(k, s, m, m)
    assert res.projection_residual <= 1e-8
    assert res.partial_isometry_ok


@pytest.mark.parametrize("kspec", [KernelSpec.szego(), KernelSpec.bergman()])
def test_pipeline_nested(kspec):
    sample, k, s, m, nn = nested(kspec)
    res = arias_pipeline(k, s, m, nn)
    assert res.projection_residual <= 1e-7
    sv = res.composite_singular_values
    assert np.all(np.minimum(np.abs(sv), np.abs(sv - 1)) <= 1e-7)
    assert res.chain_upper_min_eig >= -1e-9 and res.chain_lower_min_eig >= -1e-9
    assert res.to_json()["gamma_shape"][0] == res.phi.shape[1]


def test_pipeline_rejects_third_kernel():
    sample, k, s, m, nn = nested(KernelSpec.bergman())
    ell = evaluate(KernelSpec.power_alpha(3.0), sample)
    with pytest.raises(ThreeKernelError):
        arias_pipeline(k, s, m, nn, ell=ell)


def test_pipeline_stage_error_for_reversed_inclusion():
    sample, k, s, m, nn = nested(KernelSpec.bergman())
    with pytest.raises(StageError):
        arias_pipeline(k, s, nn, m)
