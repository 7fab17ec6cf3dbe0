import numpy as np
import pytest

from chabident.tensors import (
    DDOT_WEIGHTS,
    IDENTITY,
    DegenerateDirection,
    ddot,
    deviator,
    equivalent_stress,
    flow_direction,
    norm,
    principal_stresses,
    sym,
    to_matrix,
    trace,
    zero,
)


def random_sym(rng, scale=1.0):
    return rng.standard_normal(6) * scale


def test_ddot_weights_off_diagonal_pairs():
    a = sym(1, 2, 3, 4, 5, 6)
    b = sym(6, 5, 4, 3, 2, 1)
    expected = 1 * 6 + 2 * 5 + 3 * 4 + 2 * (4 * 3 + 5 * 2 + 6 * 1)
    assert ddot(a, b) == expected
    assert ddot(a, b) == ddot(b, a)


def test_ddot_positive_definite():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = random_sym(rng)
        assert ddot(t, t) > 0.0
    assert ddot(zero(), zero()) == 0.0


def test_deviator_subtracts_mean_trace():
    np.testing.assert_allclose(deviator(sym(3, 0, 0)), sym(2, -1, -1))


def test_deviator_kills_hydrostatic():
    np.testing.assert_allclose(deviator(4.2 * IDENTITY), np.zeros(6))


def test_deviator_leaves_pure_shear():
    t = sym(t12=5.0)
    np.testing.assert_allclose(deviator(t), t)


def test_deviator_trace_machine_zero():
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = random_sym(rng, scale=1e9)
        d = deviator(t)
        assert abs(trace(d)) <= 1e-12 * max(norm(t), 1.0)


def test_equivalent_stress_uniaxial():
    for s in (2.5e8, -2.5e8):
        assert equivalent_stress(sym(s, 0, 0), zero()) == pytest.approx(abs(s), rel=1e-14)


def test_equivalent_stress_pure_shear():
    tau = 1.3e8
    assert equivalent_stress(sym(t12=tau), zero()) == pytest.approx(
        np.sqrt(3.0) * tau, rel=1e-14
    )


def test_equivalent_stress_zero_relative():
    rng = np.random.default_rng(2)
    s = random_sym(rng, 1e8)
    assert equivalent_stress(s, s) == 0.0


def test_flow_direction_uniaxial():
    d = flow_direction(sym(2.0e8, 0, 0), zero())
    np.testing.assert_allclose(d, sym(1.0, -0.5, -0.5), rtol=1e-14, atol=1e-14)


def test_flow_direction_degenerate_hydrostatic():
    with pytest.raises(DegenerateDirection):
        flow_direction(3.0e8 * IDENTITY, zero())


def test_flow_direction_unit_equivalent_norm():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = random_sym(rng, 1e8)
        chi = random_sym(rng, 1e7)
        d = flow_direction(s, chi)
        assert np.sqrt((2.0 / 3.0) * ddot(d, d)) == pytest.approx(1.0, rel=1e-12)


def test_flow_direction_homogeneity():
    rng = np.random.default_rng(4)
    for _ in range(20):
        s = random_sym(rng, 1e8)
        chi = random_sym(rng, 1e7)
        d = flow_direction(s, chi)
        s_eq = equivalent_stress(s, chi)
        assert ddot(d, s - chi) == pytest.approx(s_eq, rel=1e-10)


def test_flow_direction_matches_finite_differences():
    # gradient of the equivalent stress in stored components carries the
    # double-contraction weights on the off-diagonal slots
    rng = np.random.default_rng(5)
    s = random_sym(rng, 1e8)
    chi = random_sym(rng, 1e7)
    d = flow_direction(s, chi)
    h = 1.0
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        fd = (equivalent_stress(s + e, chi) - equivalent_stress(s - e, chi)) / (2 * h)
        assert fd / DDOT_WEIGHTS[j] == pytest.approx(d[j], rel=1e-6, abs=1e-9)


def test_to_matrix_symmetric():
    t = sym(1, 2, 3, 4, 5, 6)
    m = to_matrix(t)
    np.testing.assert_array_equal(m, m.T)
    assert m[0, 1] == 4 and m[0, 2] == 5 and m[1, 2] == 6


def test_principal_stresses_sorted_and_consistent():
    rng = np.random.default_rng(6)
    for _ in range(20):
        t = random_sym(rng, 1e8)
        lam = principal_stresses(t)
        assert lam[0] >= lam[1] >= lam[2]
        m = to_matrix(t)
        for v in lam:
            assert abs(np.linalg.det(m - v * np.eye(3))) <= 1e-9 * max(
                np.abs(lam).max(), 1.0
            ) ** 3


def test_principal_stresses_diagonal_input():
    np.testing.assert_allclose(principal_stresses(sym(1.0, 3.0, 2.0)), [3.0, 2.0, 1.0])


def test_principal_stresses_pure_shear():
    tau = 2.0e7
    np.testing.assert_allclose(
        principal_stresses(sym(t12=tau)), [tau, 0.0, -tau], atol=1e-7
    )
