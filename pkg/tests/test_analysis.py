"""Error measurement, convergence rates, and the study driver."""

import math

import numpy as np
import pytest

from spfide import (
    ProblemSpec,
    StudyCellError,
    build_shishkin,
    double_mesh_error,
    example1,
    max_error,
    rate,
    run_study,
    solve_single,
)


def test_solve_single_reproduces_known_error_levels():
    problem, exact = example1()
    mesh, y, gap = solve_single(problem, 2.0 ** -24, 64)
    assert gap is None
    assert max_error(y, exact, mesh, 2.0 ** -24) == pytest.approx(1.0157e-4, rel=0.05)

    mesh, y, _ = solve_single(problem, 1.0, 64)
    assert max_error(y, exact, mesh, 1.0) == pytest.approx(2.389e-6, rel=0.05)


def test_solver_both_returns_the_cross_check_gap():
    problem, _ = example1()
    _, y, gap = solve_single(problem, 2.0 ** -12, 64, solver="both")
    assert y.solver_tag == "lu"
    assert gap is not None and gap <= 1e-9


def test_solve_single_rejects_unknown_solver():
    problem, _ = example1()
    with pytest.raises(ValueError, match="solver"):
        solve_single(problem, 0.5, 16, solver="cg")


def test_rate_values():
    assert rate(4e-4, 1e-4) == pytest.approx(2.0, abs=1e-12)
    assert rate(1.0157e-4, 2.561e-5) == pytest.approx(1.99, abs=0.01)
    # a refinement that makes things worse must show up as a negative rate
    assert rate(6.154e-7, 1.635e-6) == pytest.approx(-1.41, abs=0.01)


def test_rate_is_nan_on_degenerate_errors():
    assert math.isnan(rate(0.0, 1e-5))
    assert math.isnan(rate(1e-5, 0.0))
    assert math.isnan(rate(-1e-5, 1e-6))
    assert math.isnan(rate(math.inf, 1e-6))


def test_double_mesh_tracks_the_true_error():
    problem, exact = example1()
    for eps, n in [(1.0, 64), (2.0 ** -12, 64), (2.0 ** -12, 128)]:
        estimate = double_mesh_error(problem, eps, n)
        mesh, y, _ = solve_single(problem, eps, n)
        true_error = max_error(y, exact, mesh, eps)
        assert 0.25 <= estimate / true_error <= 4.0, (eps, n)


def test_double_mesh_vanishes_on_a_nodally_exact_problem():
    # both meshes clamp to uniform at this epsilon, so the coarse nodes are
    # a subset of the fine ones and nodal exactness carries over verbatim
    p = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=lambda x: 0.0 * np.asarray(x),
        kernel=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        kernel_dxi=lambda x, eta: 0.0 * np.asarray(x) * np.asarray(eta),
        lam=0.0, alpha=0.0, beta=1.0, t_end=1.0, a_bar=2.0,
    )
    assert double_mesh_error(p, 0.5, 32) <= 1e-9


def test_double_mesh_rejects_odd_n():
    problem, _ = example1()
    with pytest.raises(ValueError, match="even"):
        double_mesh_error(problem, 0.5, 33)


def test_run_study_structure():
    problem, exact = example1()
    eps_list = (1.0, 2.0 ** -12)
    n_list = (32, 64, 128)
    report = run_study(problem, exact, eps_list, n_list)

    assert report.epsilons == eps_list
    assert report.ns == n_list
    assert report.errors.shape == (2, 3)
    assert report.method == "exact-solution"
    np.testing.assert_array_equal(report.uniform_errors, report.errors.max(axis=0))
    # every column but the last has a doubled partner
    assert np.all(np.isfinite(report.rates[:, :-1]))
    assert np.all(np.isnan(report.rates[:, -1]))
    assert np.isnan(report.uniform_rates[-1])
    assert report.rho_branch_switched == (False, False)


def test_run_study_without_exact_uses_double_mesh():
    problem, _ = example1()
    report = run_study(problem, None, (2.0 ** -12,), (32, 64))
    assert report.method == "double-mesh"
    assert np.all(report.errors > 0.0)


def test_run_study_cross_check_gaps():
    problem, exact = example1()
    report = run_study(problem, exact, (2.0 ** -6,), (32, 64), solver="both")
    assert report.cross_check_gaps is not None
    assert np.all(report.cross_check_gaps <= 1e-9)


def test_run_study_detects_rho_branch_switch():
    # at this epsilon the transition point is capped for large n only
    problem, exact = example1()
    report = run_study(problem, exact, (2.0 ** -3,), (8, 4096))
    assert report.rho_branch_switched == (True,)


def test_run_study_flags_deep_refinement_consistency():
    # the two smallest-epsilon rows of the standard grid are nearly identical:
    # once the layer is unresolved by orders of magnitude the discrete
    # problem no longer depends on epsilon
    problem, exact = example1()
    report = run_study(problem, exact, (2.0 ** -18, 2.0 ** -24), (64, 128))
    row18, row24 = report.errors
    np.testing.assert_allclose(row18, row24, rtol=5e-3)


def test_run_study_validates_inputs():
    problem, exact = example1()
    with pytest.raises(ValueError, match="epsilon_list"):
        run_study(problem, exact, (), (32,))
    with pytest.raises(ValueError, match="n_list"):
        run_study(problem, exact, (0.5,), ())
    with pytest.raises(ValueError, match="even"):
        run_study(problem, exact, (0.5,), (31,))
    with pytest.raises(ValueError, match="ascending"):
        run_study(problem, exact, (0.5,), (64, 32))


def test_run_study_warns_and_wraps_on_oversized_coupling():
    base, _ = example1()
    diverging = ProblemSpec(
        a=base.a, f=base.f, kernel=base.kernel, kernel_dxi=base.kernel_dxi,
        lam=4.0, alpha=base.alpha, beta=base.beta, t_end=base.t_end,
        a_bar=base.a_bar,
    )
    with pytest.warns(UserWarning, match="bound"):
        with pytest.raises(StudyCellError) as excinfo:
            run_study(diverging, None, (0.25,), (8,), solver="fixed-point")
    assert excinfo.value.n == 8
    assert excinfo.value.epsilon == 0.25
