"""Fitting kernels and per-node coefficients.

The reference values for the exponential-average kernel t/(e^t - 1) were
computed once at 50-digit precision and frozen here; the implementation has
to reproduce them in double precision across all branch regimes (series,
direct, and both saturation tails).
"""

import math

import numpy as np
import pytest

from spfide import (
    ProblemSpec,
    bernoulli,
    build_shishkin,
    compute_chi,
    compute_fitted,
    compute_gamma,
    compute_kernel_matrix,
    example1,
)

# (t, reference) pairs spanning every evaluation branch
BERNOULLI_REFERENCE = [
    (1e-10, 0.99999999995),
    (-1e-10, 1.00000000005),
    (1e-3, 0.9995000833333319444445),
    (-1e-3, 1.000500083333331944444),
    (1.0, 0.581976706869326424385),
    (-1.0, 1.581976706869326424385),
    (30.0, 2.807286890652315076798e-12),
    (-30.0, 30.00000000000280728689),
    (700.0, 6.901773580631839599694e-302),
    (-700.0, 700.0),
]


@pytest.mark.parametrize("t, reference", BERNOULLI_REFERENCE)
def test_bernoulli_against_frozen_references(t, reference):
    assert bernoulli(t) == pytest.approx(reference, rel=1e-14)


def test_bernoulli_edge_values():
    assert bernoulli(0.0) == 1.0
    assert bernoulli(1.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-15)
    assert bernoulli(1e6) == 0.0
    assert bernoulli(-1e6) == 1e6
    assert math.isnan(bernoulli(math.nan))


def test_bernoulli_reflection_identity():
    # t/(e^t-1) satisfies B(-t) - B(t) = t for every t
    for t in (0.5, 5.0, 50.0):
        assert bernoulli(-t) - bernoulli(t) == pytest.approx(t, rel=1e-12)


def test_bernoulli_array_matches_scalar():
    ts = np.array([-700.0, -30.0, -1e-3, 0.0, 1e-10, 1.0, 30.0, 700.0])
    out = bernoulli(ts)
    np.testing.assert_array_equal(out, [bernoulli(float(t)) for t in ts])


def test_chi_at_unit_mesh_peclet():
    # sigma = a h / eps = 1 on the uniform quarter mesh
    mesh = build_shishkin(4, 1.0, 2.0, 1.0)
    assert mesh.clamped and mesh.steps[0] == 0.25
    chi1, chi2 = compute_chi(2, mesh, 2.0, 0.5)
    assert chi1 == pytest.approx(1.0 - 1.0 / (math.e - 1.0), rel=1e-14)
    assert chi1 + chi2 == pytest.approx(1.0, abs=1e-15)


def test_chi_partition_of_unity_on_uniform_spacing():
    mesh = build_shishkin(64, 1.0, 2.0, 1.0)  # clamped, h = 1/64
    for eps in (1.0, 2.0 ** -6, 2.0 ** -24):
        sums = [sum(compute_chi(i, mesh, 2.0, eps)) for i in range(1, 64)]
        np.testing.assert_allclose(sums, 1.0, rtol=0, atol=1e-15)


def test_chi_partition_of_unity_within_mesh_regions():
    # triples that stay inside the fine or the coarse part are uniform
    mesh = build_shishkin(64, 2.0 ** -12, 2.0, 1.0)
    eps = 2.0 ** -12
    half = mesh.n // 2
    for i in list(range(1, half)) + list(range(half + 1, mesh.n)):
        chi1, chi2 = compute_chi(i, mesh, 2.0, eps)
        assert abs(chi1 + chi2 - 1.0) <= 1e-12


def test_chi_upwind_degeneration():
    mesh = build_shishkin(64, 1.0, 2.0, 1.0)
    chi1, chi2 = compute_chi(10, mesh, 2.0, 1e-14)
    assert abs(chi1) <= 1e-10
    assert abs(chi2 - 1.0) <= 1e-10  # h_{i+1}/hbar_i = 1 here


def test_gamma_upwind_limits():
    mesh = build_shishkin(64, 1.0, 2.0, 1.0)
    eps = 1e-12
    h = 1.0 / 64
    hbar = h
    gamma1, gamma2 = compute_gamma(10, mesh, 2.0, eps)
    assert gamma1 == pytest.approx(-(eps / 2.0) ** 2 / hbar, rel=1e-9)
    expected2 = (h * h / 2.0 - h * eps / 2.0 + (eps / 2.0) ** 2) / hbar
    assert gamma2 == pytest.approx(expected2, rel=1e-9)


def _basis_moment(mesh, i, a_i, epsilon, panels):
    """First moments of the exponential basis by brute-force trapezoid."""
    x_im1, x_i, x_ip1 = mesh.nodes[i - 1], mesh.nodes[i], mesh.nodes[i + 1]
    h_i = mesh.steps[i - 1]
    h_ip1 = mesh.steps[i]
    hbar = mesh.half_steps[i]

    left = np.linspace(x_im1, x_i, panels + 1)
    psi1 = np.expm1(a_i * (left - x_im1) / epsilon) / np.expm1(a_i * h_i / epsilon)
    m1 = np.trapezoid((left - x_i) * psi1, left) / hbar

    right = np.linspace(x_i, x_ip1, panels + 1)
    psi2 = -np.expm1(-a_i * (x_ip1 - right) / epsilon) / -np.expm1(-a_i * h_ip1 / epsilon)
    m2 = np.trapezoid((right - x_i) * psi2, right) / hbar
    return m1, m2


def test_gamma_matches_basis_moments():
    """gamma are the hbar-relative first moments of the basis functions."""
    mesh = build_shishkin(32, 0.05, 1.0, 1.0)
    a = lambda x: 1.0 + x
    rng = np.random.default_rng(7)
    for i in rng.choice(np.arange(1, 32), size=3, replace=False):
        a_i = a(mesh.nodes[i])
        gamma1, gamma2 = compute_gamma(int(i), mesh, a_i, 0.05)
        m1, m2 = _basis_moment(mesh, int(i), a_i, 0.05, 100_000)
        assert gamma1 == pytest.approx(m1, rel=1e-7)
        assert gamma2 == pytest.approx(m2, rel=1e-7)


def test_interior_index_is_validated():
    mesh = build_shishkin(8, 0.5, 2.0, 1.0)
    for bad in (0, 8, -1, 9):
        with pytest.raises(IndexError):
            compute_chi(bad, mesh, 2.0, 0.5)
        with pytest.raises(IndexError):
            compute_gamma(bad, mesh, 2.0, 0.5)


def test_fitted_coefficients_for_the_model_problem():
    problem, _ = example1()
    eps = 2.0 ** -6
    mesh = build_shishkin(64, eps, 2.0, 1.0)
    coeffs = compute_fitted(mesh, problem, eps)

    assert np.all(coeffs.theta > 0.0)
    # constant a: the slope term drops out and ahat reduces to a * chi
    np.testing.assert_array_equal(coeffs.ahat1, 2.0 * coeffs.chi1)
    np.testing.assert_array_equal(coeffs.ahat2, 2.0 * coeffs.chi2)

    # off the fine/coarse junction the averaged convection equals a itself;
    # at the junction the step jump leaves a genuine excess
    junction = mesh.n // 2 - 1  # position of node n/2 in the interior arrays
    off = np.delete(coeffs.cap_a, junction)
    np.testing.assert_allclose(off, 2.0, rtol=1e-9)
    assert coeffs.cap_a[junction] == pytest.approx(3.016049560108539, rel=1e-12)


def test_constant_source_passes_through_unaveraged():
    mesh = build_shishkin(16, 2.0 ** -4, 2.0, 1.0)
    p = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=lambda x: 3.0 + 0.0 * np.asarray(x),
        kernel=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        kernel_dxi=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        lam=0.0, alpha=0.0, beta=1.0, t_end=1.0, a_bar=2.0,
    )
    coeffs = compute_fitted(mesh, p, 2.0 ** -4)
    np.testing.assert_array_equal(coeffs.fhat, 3.0 * (coeffs.chi1 + coeffs.chi2))


def test_nonfinite_problem_data_is_rejected():
    mesh = build_shishkin(8, 0.5, 2.0, 1.0)
    p = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=lambda x: np.where(np.asarray(x) > 0.6, np.nan, 1.0),
        kernel=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        kernel_dxi=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        lam=0.0, alpha=0.0, beta=1.0, t_end=1.0, a_bar=2.0,
    )
    with pytest.raises(ValueError, match="node"):
        compute_fitted(mesh, p, 0.5)


def test_coefficients_stay_finite_under_extreme_stiffness():
    problem, _ = example1()
    for k in (0, 8, 24, 48):
        eps = 2.0 ** -k
        for n in (8, 64, 1024):
            mesh = build_shishkin(n, eps, 2.0, 1.0)
            coeffs = compute_fitted(mesh, problem, eps)
            for name in ("chi1", "chi2", "gamma1", "gamma2",
                         "ahat1", "ahat2", "theta", "cap_a", "fhat"):
                assert np.all(np.isfinite(getattr(coeffs, name))), (k, n, name)
            assert np.all(coeffs.chi1 >= 0.0)
            assert np.all(coeffs.chi2 >= 0.0)
            assert np.all(coeffs.theta > 0.0)


def test_kernel_matrix_zero_kernel():
    mesh = build_shishkin(16, 0.25, 2.0, 1.0)
    p = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=np.exp,
        kernel=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        kernel_dxi=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        lam=0.0, alpha=0.0, beta=1.0, t_end=1.0, a_bar=2.0,
    )
    coeffs = compute_fitted(mesh, p, 0.25)
    kmat = compute_kernel_matrix(mesh, p, coeffs)
    assert kmat.entries.shape == (15, 17)
    assert np.all(kmat.entries == 0.0)


def test_kernel_matrix_row_sums_for_unit_kernel():
    # K == 1 with zero derivative: row i sums to (chi1+chi2)_i * t_end
    mesh = build_shishkin(16, 1.0, 2.0, 1.0)
    p = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=np.exp,
        kernel=lambda x, eta: 1.0 + 0.0 * np.asarray(x) * np.asarray(eta),
        kernel_dxi=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        lam=0.1, alpha=0.0, beta=1.0, t_end=1.0, a_bar=2.0,
    )
    coeffs = compute_fitted(mesh, p, 1.0)
    kmat = compute_kernel_matrix(mesh, p, coeffs)
    np.testing.assert_allclose(
        kmat.entries.sum(axis=1), coeffs.chi1 + coeffs.chi2, rtol=1e-12
    )


def test_kernel_matrix_row_against_fine_quadrature():
    problem, _ = example1()
    eps = 2.0 ** -6
    mesh = build_shishkin(256, eps, 2.0, 1.0)
    coeffs = compute_fitted(mesh, problem, eps)
    kmat = compute_kernel_matrix(mesh, problem, coeffs)
    i = 128
    x_i = mesh.nodes[i]
    chi_sum = coeffs.chi1[i - 1] + coeffs.chi2[i - 1]
    gamma_sum = coeffs.gamma1[i - 1] + coeffs.gamma2[i - 1]
    eta = np.linspace(0.0, 1.0, 100_001)
    modified = problem.kernel(x_i, eta) * chi_sum + problem.kernel_dxi(x_i, eta) * gamma_sum
    reference = np.trapezoid(modified, eta)
    assert kmat.entries[i - 1].sum() == pytest.approx(reference, rel=1e-3)
    # and the closed form of that integral for the exponential kernel
    assert reference == pytest.approx(
        math.exp(x_i) * (1.0 - math.exp(-1.0)) * (chi_sum + gamma_sum), rel=1e-6
    )


def test_kernel_matrix_rejects_foreign_coefficients():
    problem, _ = example1()
    mesh_small = build_shishkin(8, 0.25, 2.0, 1.0)
    mesh_big = build_shishkin(16, 0.25, 2.0, 1.0)
    coeffs = compute_fitted(mesh_small, problem, 0.25)
    with pytest.raises(ValueError, match="length"):
        compute_kernel_matrix(mesh_big, problem, coeffs)
