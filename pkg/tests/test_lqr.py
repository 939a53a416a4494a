import numpy as np
import pytest
from scipy.linalg import solve_continuous_are

from adaptiveGHX.analysis.controllability import controllability_report
from adaptiveGHX.control.lqr import (
    care_residual,
    lyapunov_residual,
    solve_care,
    solve_lyapunov,
)
from adaptiveGHX.matcore import is_hurwitz
from adaptiveGHX.utils.errors import StabilityError


def test_lyapunov_closed_forms():
    np.testing.assert_allclose(solve_lyapunov(-np.eye(2), np.eye(2)), 0.5 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(
        solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0])), np.eye(2), atol=1e-12
    )


def test_lyapunov_on_ghx_design(design):
    q_lyap = 1e-6 * np.eye(2)
    p = solve_lyapunov(design.a_h, q_lyap)
    assert lyapunov_residual(design.a_h, q_lyap, p) <= 1e-10
    np.testing.assert_array_equal(p, p.T)
    assert np.min(np.linalg.eigvalsh(p)) > 0


def test_lyapunov_rejects_unstable_matrix():
    with pytest.raises(StabilityError):
        solve_lyapunov(np.diag([-1.0, 0.5]), np.eye(2))


def test_care_scalar_closed_forms():
    one = np.array([[1.0]])
    p = solve_care(-one, one, one, one, tol=1e-13)
    assert p[0, 0] == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-12)
    p = solve_care(np.zeros((1, 1)), one, one, one, k0=one, tol=1e-13)
    assert p[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_care_needs_a_stabilising_start():
    one = np.array([[1.0]])
    with pytest.raises(StabilityError):
        solve_care(np.zeros((1, 1)), one, one, one)
    with pytest.raises(StabilityError):
        solve_care(np.zeros((1, 1)), one, one, one, k0=-one)


def test_ghx_design(ghx, design):
    assert care_residual(ghx.a, ghx.b, design.q, design.r, design.p_care) <= 1e-8
    assert is_hurwitz(design.a_h)
    np.testing.assert_allclose(design.q, 10.0 * np.eye(2))
    np.testing.assert_allclose(design.r, 1000.0 * np.eye(2))
    np.testing.assert_allclose(design.a_h, ghx.a - ghx.b @ design.k, atol=1e-15)
    np.testing.assert_allclose(ghx.a + ghx.b @ design.theta_star_r, design.a_h, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(design.p_care)) > 0


def test_ghx_care_agrees_with_scipy(ghx, design):
    reference = solve_continuous_are(ghx.a, ghx.b, design.q, design.r)
    np.testing.assert_allclose(design.p_care, reference, rtol=1e-6)


def test_ghx_controllability_matches_identified_model(ghx):
    report = controllability_report(ghx.a, ghx.b)
    assert report.singular_values[0] == pytest.approx(0.77214562, abs=1e-6)
    assert report.singular_values[1] == pytest.approx(0.00370246, abs=1e-6)
    assert report.rank == 2
    assert 208.0 <= report.condition_number <= 210.0
    assert report.c_matrix.shape == (2, 4)


def test_controllability_trivial_and_permutation(ghx):
    report = controllability_report(np.zeros((2, 2)), np.eye(2))
    np.testing.assert_allclose(report.singular_values, [1.0, 1.0])
    assert report.rank == 2
    swapped = controllability_report(ghx.a, ghx.b[:, ::-1])
    np.testing.assert_allclose(
        swapped.singular_values, controllability_report(ghx.a, ghx.b).singular_values, atol=1e-10
    )


def test_rank_deficient_pair_is_reported():
    report = controllability_report(np.diag([-1.0, -2.0]), np.array([[1.0], [0.0]]))
    assert report.rank == 1
    assert report.singular_values[-1] == pytest.approx(0.0, abs=1e-12)
