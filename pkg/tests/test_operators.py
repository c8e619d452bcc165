"""Triangle diagrams, Jacobi eigensolver, PSD square roots, identity checks."""

from __future__ import annotations

import numpy as np
import pytest

from opentriangle import (
    EigenConvergenceError,
    NotPositiveSemidefiniteError,
    translation_to,
)
from opentriangle.exact import (
    PercolationModel,
    SizeResolvedFamily,
    enumerate_size_resolved,
    enumerate_two_point,
    cycle_two_point_matrix,
)
from opentriangle.operators import (
    commutation_defect,
    family_roots,
    is_psd,
    open_triangle_profile,
    sqrt_psd,
    symmetric_eigen,
    tail_bound_check,
    triangle_diagram,
    triangle_finiteness_series,
    triangle_value,
    verify_decomposition,
    verify_spectral_identity,
)

PSD_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


# ----------------------------------------------------------------------
# Triangle diagram
# ----------------------------------------------------------------------


def test_triangle_diagram_identity():
    assert np.array_equal(triangle_diagram(np.eye(5)), np.eye(5))


def test_triangle_diagram_single_edge(k2):
    B = enumerate_two_point(PercolationModel(k2, 0.5))
    Q = triangle_diagram(B)
    # 1 + 3 p^2 and 3 p + p^3 at p = 1/2
    assert Q[0, 0] == pytest.approx(1.75, abs=1e-15)
    assert Q[0, 1] == pytest.approx(1.625, abs=1e-15)
    assert np.array_equal(Q, Q.T)


def test_triangle_diagram_all_ones():
    n = 6
    Q = triangle_diagram(np.ones((n, n)))
    assert Q == pytest.approx(np.full((n, n), float(n * n)))


def test_triangle_diagram_rejects_bad_input():
    with pytest.raises(ValueError):
        triangle_diagram(np.ones((3, 4)))
    with pytest.raises(ValueError):
        triangle_diagram(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_triangle_value_matches_diagram(battery):
    for g in battery:
        B = enumerate_two_point(PercolationModel(g, 0.5))
        Q = triangle_diagram(B)
        for v in range(g.vertex_count):
            assert triangle_value(B, v) == pytest.approx(Q[v, v], rel=1e-13)


def test_triangle_value_constant_on_transitive_graphs(battery):
    for g in battery:
        B = enumerate_two_point(PercolationModel(g, 0.45))
        values = [triangle_value(B, v) for v in range(g.vertex_count)]
        assert max(values) - min(values) <= 1e-12 * max(1.0, max(values))


def test_triangle_value_at_p_zero(k4):
    B = enumerate_two_point(PercolationModel(k4, 0.0))
    assert triangle_value(B, 2) == 1.0


# ----------------------------------------------------------------------
# Open triangle profile
# ----------------------------------------------------------------------


def test_profile_radius_zero_is_offdiagonal_max(cycle6):
    B = enumerate_two_point(PercolationModel(cycle6, 0.5))
    Q = triangle_diagram(B)
    profile = open_triangle_profile(cycle6, Q, 0)
    assert profile.radii[0] == 0
    assert profile.values[0] == pytest.approx(max(Q[0, w] for w in range(1, 6)))


def test_profile_on_cycle8_closed_form():
    from opentriangle import build_cycle

    g = build_cycle(8)
    Q = triangle_diagram(cycle_two_point_matrix(8, 0.5))
    profile = open_triangle_profile(g, Q, 0)
    assert profile.radii == (0, 1, 2, 3)  # eccentricity 4
    values = np.array(profile.values)
    assert (np.diff(values) < 0).all()  # strictly decreasing here


def test_profile_at_p_zero(torus33):
    Q = triangle_diagram(np.eye(9))
    profile = open_triangle_profile(torus33, Q, 4)
    assert all(value == 0.0 for value in profile.values)


def test_profile_nonincreasing(battery):
    for g in battery:
        Q = triangle_diagram(enumerate_two_point(PercolationModel(g, 0.6)))
        for v in (0, g.vertex_count // 2):
            profile = open_triangle_profile(g, Q, v)
            values = np.array(profile.values)
            assert (np.diff(values) <= 0).all()
            assert len(profile.radii) == int(g.distance_row(v).max())


# ----------------------------------------------------------------------
# Eigensolver
# ----------------------------------------------------------------------


def test_eigen_identity():
    d = symmetric_eigen(np.eye(4))
    assert np.array_equal(d.eigenvalues, np.ones(4))
    assert d.sweeps == 0


def test_eigen_two_by_two():
    d = symmetric_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert d.eigenvalues == pytest.approx([1.0, 3.0], abs=1e-12)


def test_eigen_single_edge_two_point(k2):
    for p in (0.2, 0.5, 0.9):
        B = enumerate_two_point(PercolationModel(k2, p))
        d = symmetric_eigen(B)
        assert d.eigenvalues == pytest.approx([1 - p, 1 + p], abs=1e-12)


def test_eigen_random_battery():
    """Reconstruction and orthonormality on random symmetric matrices."""
    rng = np.random.default_rng(314)
    for _ in range(100):
        n = int(rng.integers(1, 65))
        A = rng.normal(size=(n, n))
        A = (A + A.T) / 2
        d = symmetric_eigen(A)
        norm = np.linalg.norm(A)
        assert np.linalg.norm(d.reconstruct() - A) <= 1e-10 * max(1.0, norm)
        assert (
            np.linalg.norm(d.eigenvectors.T @ d.eigenvectors - np.eye(n)) <= 1e-10
        )
        # independent route: library eigensolver
        assert d.eigenvalues == pytest.approx(
            np.linalg.eigvalsh(A), abs=1e-10 * max(1.0, norm)
        )
        assert (np.diff(d.eigenvalues) >= 0).all()


def test_eigen_convergence_refusal():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    with pytest.raises(EigenConvergenceError):
        symmetric_eigen(A, max_sweeps=0)


# ----------------------------------------------------------------------
# PSD verdicts and square roots
# ----------------------------------------------------------------------


def test_is_psd_examples():
    ok, lam = is_psd(np.zeros((3, 3)))
    assert ok and lam == 0.0
    ok, lam = is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not ok
    assert lam == pytest.approx(-1.0, abs=1e-12)


def test_two_point_matrix_is_psd(battery):
    for g in battery:
        for p in PSD_GRID:
            ok, lam = is_psd(enumerate_two_point(PercolationModel(g, p)))
            assert ok, f"{g.family} p={p}: lambda_min={lam}"
            assert lam >= -1e-9


def test_size_resolved_family_is_psd(battery):
    for g in battery:
        for p in PSD_GRID:
            family = enumerate_size_resolved(PercolationModel(g, p))
            for M in family:
                ok, lam = is_psd(M)
                assert ok, f"{g.family} p={p}: lambda_min={lam}"


def test_sqrt_identity():
    assert sqrt_psd(np.eye(3)) == pytest.approx(np.eye(3), abs=1e-12)


def test_sqrt_two_by_two():
    S = sqrt_psd(np.array([[2.0, 1.0], [1.0, 2.0]]))
    r3 = np.sqrt(3.0)
    expected = np.array([[(r3 + 1) / 2, (r3 - 1) / 2], [(r3 - 1) / 2, (r3 + 1) / 2]])
    assert S == pytest.approx(expected, abs=1e-12)


def test_sqrt_rank_one():
    for p in (0.25, 0.7):
        S = sqrt_psd(p * np.ones((2, 2)))
        assert S == pytest.approx(np.sqrt(p / 2) * np.ones((2, 2)), abs=1e-12)


def test_sqrt_round_trip_on_family(battery):
    for g in battery:
        family = enumerate_size_resolved(PercolationModel(g, 0.5))
        for M in family:
            S = sqrt_psd(M)
            assert np.array_equal(S, S.T)
            norm = np.linalg.norm(M)
            assert np.linalg.norm(S @ S - M) <= 1e-8 * max(1.0, norm)


def test_sqrt_refuses_indefinite_input():
    with pytest.raises(NotPositiveSemidefiniteError) as err:
        sqrt_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.lambda_min == pytest.approx(-1.0, abs=1e-12)


# ----------------------------------------------------------------------
# Identity chain
# ----------------------------------------------------------------------


def test_decomposition_report(k3):
    model = PercolationModel(k3, 0.5)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    report = verify_decomposition(B, family)
    assert report.passed
    assert report.max_residual <= 1e-12


def test_decomposition_exact_at_p_zero(k4):
    model = PercolationModel(k4, 0.0)
    report = verify_decomposition(
        enumerate_two_point(model), enumerate_size_resolved(model)
    )
    assert report.max_residual == 0.0


def test_decomposition_detects_missing_mass(k3):
    model = PercolationModel(k3, 0.5)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    truncated = SizeResolvedFamily(family.matrices[:1])
    report = verify_decomposition(B, truncated)
    assert not report.passed
    assert report.max_residual > 0.1


def test_decomposition_shape_mismatch(k3, k4):
    B = enumerate_two_point(PercolationModel(k4, 0.5))
    family = enumerate_size_resolved(PercolationModel(k3, 0.5))
    with pytest.raises(ValueError):
        verify_decomposition(B, family)


def test_spectral_identity_single_edge(k2):
    model = PercolationModel(k2, 0.5)
    report = verify_spectral_identity(
        enumerate_two_point(model), enumerate_size_resolved(model), 0, 1
    )
    assert report.direct == pytest.approx(1.625, abs=1e-12)
    assert report.spectral == pytest.approx(1.625, abs=1e-8)
    assert report.intermediate == pytest.approx(1.625, abs=1e-8)
    assert report.passed


def test_spectral_identity_at_p_zero(k3):
    model = PercolationModel(k3, 0.0)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    for v, w, expected in ((0, 0, 1.0), (0, 1, 0.0)):
        report = verify_spectral_identity(B, family, v, w)
        assert report.direct == expected
        assert report.spectral == pytest.approx(expected, abs=1e-12)
        assert report.passed


def test_spectral_identity_all_pairs(battery):
    for g in battery:
        model = PercolationModel(g, 0.4)
        B = enumerate_two_point(model)
        family = enumerate_size_resolved(model)
        roots = family_roots(family)
        for v in range(g.vertex_count):
            for w in range(g.vertex_count):
                report = verify_spectral_identity(B, family, v, w, roots=roots)
                assert report.passed, (g.family, v, w, report.spectral_error)


def test_tail_bound_empty_tail(torus33):
    model = PercolationModel(torus33, 0.4)
    report = tail_bound_check(
        enumerate_two_point(model), enumerate_size_resolved(model), 0, 5, 9
    )
    assert report.tail == 0.0
    assert report.bound == 0.0
    assert report.passed


def test_tail_bound_full_sum_is_q(torus33):
    model = PercolationModel(torus33, 0.4)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    Q = triangle_diagram(B)
    report = tail_bound_check(B, family, 0, 5, 0)
    assert report.tail == pytest.approx(Q[0, 5], rel=1e-8)
    assert report.bound >= report.tail
    assert report.passed


def test_tail_bound_interior_cutoff(battery):
    for g in battery:
        model = PercolationModel(g, 0.4)
        B = enumerate_two_point(model)
        family = enumerate_size_resolved(model)
        roots = family_roots(family)
        w = g.vertex_count - 1
        for cutoff in sorted({1, g.vertex_count // 2, g.vertex_count - 1}):
            report = tail_bound_check(B, family, 0, w, cutoff, roots=roots)
            assert report.passed, (g.family, cutoff)
            assert report.slack >= -1e-12


def test_tail_bound_rejects_bad_cutoff(k2):
    model = PercolationModel(k2, 0.5)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    with pytest.raises(ValueError):
        tail_bound_check(B, family, 0, 1, 3)


def test_finiteness_series(battery):
    for g in battery:
        model = PercolationModel(g, 0.5)
        B = enumerate_two_point(model)
        family = enumerate_size_resolved(model)
        series = triangle_finiteness_series(B, family, 0)
        assert len(series) == g.vertex_count
        assert (np.diff(series) >= -1e-15).all()
        expected = triangle_value(B, 0)
        assert series[-1] == pytest.approx(expected, rel=1e-8)


def test_finiteness_series_at_p_zero(cycle6):
    model = PercolationModel(cycle6, 0.0)
    series = triangle_finiteness_series(
        enumerate_two_point(model), enumerate_size_resolved(model), 0
    )
    assert series == pytest.approx(np.ones(6), abs=1e-12)


# ----------------------------------------------------------------------
# Commutation with translations
# ----------------------------------------------------------------------


def test_commutation_trivial_cases(cycle6):
    S = np.arange(36.0).reshape(6, 6)
    S = (S + S.T) / 2
    assert commutation_defect(S, translation_to(cycle6, 3, 3)) == 0.0
    phi = translation_to(cycle6, 0, 2)
    assert commutation_defect(np.eye(6), phi) == 0.0


def test_roots_commute_with_translations(cycle6, torus33):
    for g in (cycle6, torus33):
        family = enumerate_size_resolved(PercolationModel(g, 0.5))
        roots = family_roots(family)
        for S in roots:
            scale = max(1.0, np.linalg.norm(S))
            for w in (1, g.vertex_count - 1):
                phi = translation_to(g, 0, w)
                assert commutation_defect(S, phi) <= 1e-8 * scale


def test_transitive_norm_equality(battery):
    """||S_n B 1_v|| is the same for every v on a transitive graph."""
    for g in battery:
        model = PercolationModel(g, 0.5)
        B = enumerate_two_point(model)
        roots = family_roots(enumerate_size_resolved(model))
        for S in roots:
            norms = [np.linalg.norm(S @ B[v]) for v in range(g.vertex_count)]
            assert max(norms) - min(norms) <= 1e-8
