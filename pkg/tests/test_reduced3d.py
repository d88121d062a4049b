import cmath
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qpartial import reduced3d as rd
from qpartial import statevector as sv
from qpartial.config import validate_geometry
from qpartial.errors import FractionalParity
from qpartial.statevector import Ordering

from conftest import valid_geometries


def test_initial_values():
    g = validate_geometry(64, 4, 2, 4)
    s = rd.initial_reduced(g)
    assert np.allclose(s.vector, [math.sqrt(1 / 8), math.sqrt(3 / 8), math.sqrt(1 / 2)], atol=1e-15)
    assert s.norm() == pytest.approx(1, abs=1e-15)


def test_initial_matches_projection():
    g = validate_geometry(64, 4, 2, 4)
    proj = sv.project_reduced(sv.uniform_state(g))
    assert np.abs(proj - rd.initial_reduced(g).vector).max() <= 1e-15


def test_t_is_involution():
    for g in valid_geometries([16, 64, 256], [4, 8], [1, 2], [1, 2, 4]):
        T = rd.t_matrix(g)
        assert np.array_equal(T, T.T)
        assert np.abs(T @ T - np.eye(3)).max() <= 1e-12


def test_matrices_unitary():
    rng = np.random.default_rng(0)
    g = validate_geometry(256, 8, 2, 2)
    mats = [rd.global_matrix(g, j) for j in range(6)] + [rd.local_matrix(g, 2.3)]
    mats += [rd.final_matrix(g, *rng.uniform(-math.pi, math.pi, 2)) for _ in range(100)]
    for m in mats:
        assert np.abs(m.conj().T @ m - np.eye(3)).max() <= 1e-12


def test_m_composition():
    g = validate_geometry(256, 8, 2, 2)
    for a in range(4):
        for b in range(4):
            prod = rd.m_matrix(g, a) @ rd.m_matrix(g, b)
            assert np.abs(prod - rd.m_matrix(g, a + b)).max() <= 1e-12


def test_zero_iterations_identity():
    g = validate_geometry(256, 8, 2, 2)
    s = rd.initial_reduced(g)
    assert np.abs(rd.evolve_global(s, 0).vector - s.vector).max() <= 1e-15
    assert rd.evolve_local(s, 0).vector.tolist() == s.vector.tolist()


def test_local_keeps_u_exactly():
    g = validate_geometry(256, 8, 2, 2)
    s = rd.evolve_global(rd.initial_reduced(g), 3)
    for j2 in (1, 2.5, 7):
        assert rd.evolve_local(s, j2).aU == s.aU


def test_global_closed_form_components():
    rng = np.random.default_rng(5)
    for _ in range(20):
        K = int(rng.integers(2, 30))
        b = int(rng.integers(2, 40))
        g = validate_geometry(K * b, K, int(rng.integers(1, K)), int(rng.integers(1, b)))
        j1 = int(rng.integers(0, 15))
        s = rd.evolve_global(rd.initial_reduced(g), j1)
        A = (2 * j1 + 1) * g.theta1
        c1 = math.cos(g.theta1)
        expected = [math.sin(A),
                    math.cos(g.theta2) * math.sin(g.gamma) * math.cos(A) / c1,
                    math.cos(g.gamma) * math.cos(A) / c1]
        assert np.abs(s.vector - expected).max() <= 1e-12


@pytest.mark.parametrize("j", range(1, 13))
def test_matches_full_simulator(j):
    g = validate_geometry(256, 8, 2, 2)
    full = sv.uniform_state(g)
    red = rd.initial_reduced(g)
    full_g = sv.apply_global_iterations(full, j)
    assert np.abs(sv.project_reduced(full_g) - rd.evolve_global(red, j).vector).max() <= 1e-12
    full_l = sv.apply_local_iterations(full, j)
    assert np.abs(sv.project_reduced(full_l) - rd.evolve_local(red, j).vector).max() <= 1e-12


def test_fractional_global():
    g = validate_geometry(256, 8, 2, 2)
    half = rd.evolve_global(rd.initial_reduced(g), 2.5)
    A = 6 * g.theta1
    assert half.aM.real == pytest.approx(math.sin(A), abs=1e-12)
    assert half.norm() == pytest.approx(1, abs=1e-12)
    tilted = rd.ReducedState(0, 1, 0, g)
    with pytest.raises(FractionalParity):
        rd.evolve_global(tilted, 0.5)


def _final_from_projectors(g, theta, phi):
    s = rd.initial_reduced(g).vector.real
    p = 1 - cmath.exp(2j * theta)
    oracle = np.diag([cmath.exp(1j * (phi - theta)), 1, 1])
    return -(np.eye(3) - p * np.outer(s, s)) @ oracle


def test_final_matrix_entries():
    g = validate_geometry(256, 8, 2, 2)
    rng = np.random.default_rng(2)
    for theta, phi in rng.uniform(-3, 3, size=(20, 2)):
        assert np.abs(rd.final_matrix(g, theta, phi) - _final_from_projectors(g, theta, phi)).max() <= 1e-14


def test_final_with_zero_phases():
    g = validate_geometry(64, 4, 1, 1)
    assert np.allclose(rd.final_matrix(g, 0, 0), -np.eye(3), atol=0)


def test_final_standard_phases_is_ordering_b():
    g = validate_geometry(64, 4, 1, 1)
    std = rd.final_matrix(g, math.pi / 2, 3 * math.pi / 2)
    assert np.abs(std - rd.step3_matrix(g, Ordering.ORACLE_THEN_REFLECTION)).max() <= 1e-12
    full = sv.apply_local_iterations(sv.apply_global_iterations(sv.uniform_state(g), 2), 1)
    expected = sv.project_reduced(sv.apply_step3(full, "B"))
    got = rd.apply_final(rd.ReducedState.from_vector(sv.project_reduced(full), g),
                         math.pi / 2, 3 * math.pi / 2)
    assert np.abs(got.vector - expected).max() <= 1e-12


def _residual_from_amplitudes(g, j1, j2):
    A = (2 * j1 + 1) * g.theta1
    B = 2 * j2 * g.theta2
    a_nt = math.cos(A) / math.sqrt(g.N - g.z)
    r = math.sqrt((g.b - g.tau) / (g.N - g.z))
    a_t = math.cos(B) * math.sin(A) / math.sqrt(g.t) + r * math.sin(B) * math.cos(A)
    a_ntt = -math.sin(B) * math.sin(A) / math.sqrt(g.t) + r * math.cos(B) * math.cos(A)
    return g.b * (-g.K / 2 + g.t) * a_nt - g.t * math.sqrt(g.tau) * a_t - g.t * math.sqrt(g.b - g.tau) * a_ntt


@pytest.mark.parametrize("geo", [(64, 4, 1, 1), (256, 8, 2, 2), (1024, 16, 2, 4)])
def test_cancellation_two_codings(geo):
    g = validate_geometry(*geo)
    for j1 in (0, 1.5, 4):
        for j2 in (0, 0.7, 3):
            assert abs(rd.cancellation_residual(g, j1, j2) - _residual_from_amplitudes(g, j1, j2)) <= 1e-13


@pytest.mark.parametrize("ordering", ["A", "B"])
def test_cancellation_matches_simulated_mean(ordering):
    """N/2 * (a_nt - 2 * mean) equals the residual; the mean is taken after the
    oracle for ordering B."""
    g = validate_geometry(256, 8, 2, 2)
    flip = ordering == "B"
    for j1 in range(0, 6):
        for j2 in range(0, 6):
            s = sv.apply_local_iterations(sv.apply_global_iterations(sv.uniform_state(g), j1), j2)
            seen = sv.apply_target_flip(s) if flip else s
            a_nt = s.amplitudes[-1].real
            got = g.N / 2 * (a_nt - 2 * seen.amplitudes.mean().real)
            assert abs(got - rd.cancellation_residual(g, j1, j2, flip)) <= 1e-12
            after = sv.apply_step3(s, ordering).amplitudes[-1]
            assert abs(after + 2 / g.N * rd.cancellation_residual(g, j1, j2, flip)) <= 1e-12


def test_cancellation_root_empties_non_target_blocks():
    g = validate_geometry(1024, 4, 1, 1)
    j1 = 10
    f = lambda j2: rd.cancellation_residual(g, j1, j2)
    grid = np.linspace(0, math.pi / g.theta2, 400)
    vals = [f(x) for x in grid]
    i = next(i for i in range(len(vals) - 1) if vals[i] * vals[i + 1] < 0)
    root = brentq(f, grid[i], grid[i + 1], xtol=1e-14)
    s = rd.apply_step3(rd.evolve_local(rd.evolve_global(rd.initial_reduced(g), j1), root), "A")
    assert abs(s.aU) <= 1e-12
    assert rd.target_mass(s) == pytest.approx(1, abs=1e-12)


def test_cancellation_periodic_in_j2():
    g = validate_geometry(1024, 4, 1, 1)
    period = math.pi / g.theta2
    for j2 in (0.3, 2.0, 5.5):
        assert rd.cancellation_residual(g, 3, j2) == pytest.approx(
            rd.cancellation_residual(g, 3, j2 + period), abs=1e-9)


def test_large_block_orderings_converge():
    """The two orderings leave the target blocks in the same state as b grows."""
    from qpartial.asymptotic import integer_schedule
    gaps = []
    for n in (8, 12, 16, 20):
        g = validate_geometry(4 * 2**n, 4, 1, 1)
        sch = integer_schedule(g)
        a = rd.run_partial_search(g, sch.j1, sch.j2, "A")
        b = rd.run_partial_search(g, sch.j1, sch.j2, "B")
        gaps.append(abs(abs(a.aM) - abs(b.aM)))
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2


def test_marginals_and_angle():
    g = validate_geometry(64, 4, 2, 4)
    s = rd.run_partial_search(g, 1, 1)
    full = sv.run_partial_search(g, 1, 1)
    assert np.abs(rd.block_marginals(s) - sv.block_marginals(full)).max() <= 1e-12
    assert rd.non_target_residual(s) == pytest.approx(sv.non_target_residual(full), abs=1e-12)
    w = rd.canonical_angle(s)
    assert math.sin(w) ** 2 == pytest.approx(abs(s.aM) ** 2 / rd.target_mass(s), abs=1e-12)
