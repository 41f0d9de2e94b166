import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from dqc1chaos.kickedtop import (
    CHAOTIC,
    REGULAR,
    TopParams,
    angular_momentum,
    expm_hermitian,
    floquet,
    interpolate_params,
    kick_generators,
)
from dqc1chaos.linalg import eigenphases, unitarity_defect
from dqc1chaos.spectral import eigenphase_walk, form_factor_series, t_statistics

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def test_spin_half_is_half_pauli():
    ops = angular_momentum(0.5)
    for name, mat in zip("xyz", ops):
        np.testing.assert_allclose(mat, PAULI[name] / 2, atol=1e-15)


def test_spin_one():
    jx, jy, jz = angular_momentum(1)
    np.testing.assert_array_equal(jz, np.diag([1, 0, -1]))
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(jx, r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]), atol=1e-15)
    np.testing.assert_allclose(jy, r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]), atol=1e-15)


@pytest.mark.parametrize("j", [0, 0.5, 3, 7.5, 20])
def test_algebra(j):
    jx, jy, jz = angular_momentum(j)
    for m in (jx, jy, jz):
        assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    comm = lambda a, b: a @ b - b @ a  # noqa: E731
    assert np.max(np.abs(comm(jx, jy) - 1j * jz)) <= 1e-9
    assert np.max(np.abs(comm(jy, jz) - 1j * jx)) <= 1e-9
    assert np.max(np.abs(comm(jz, jx) - 1j * jy)) <= 1e-9
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.max(np.abs(casimir - j * (j + 1) * np.eye(int(2 * j) + 1))) <= 1e-8


@pytest.mark.parametrize("j", [-1, 0.3, 1.25])
def test_invalid_spin(j):
    with pytest.raises(ValueError):
        angular_momentum(j)
    with pytest.raises(ValueError):
        TopParams((0, 0, 0), (0, 0, 0), j)


def test_params_layout():
    p = TopParams.chaotic(20)
    assert p.vector == CHAOTIC and p.dim == 41
    assert TopParams.regular(2.5).dim == 6
    with pytest.raises(ValueError):
        TopParams.from_vector((1, 2, 3), 1)


@pytest.mark.parametrize("j", [0.5, 4, 11.5])
def test_zero_params_give_identity(j):
    f = floquet(TopParams((0, 0, 0), (0, 0, 0), j))
    np.testing.assert_allclose(f.data, np.eye(int(2 * j) + 1), atol=1e-13)


def test_z_rotation_is_diagonal():
    j, az = 6, 0.77
    f = floquet(TopParams((0, 0, az), (0, 0, 0), j))
    m = np.arange(j, -j - 1, -1)
    np.testing.assert_allclose(f.data, np.diag(np.exp(-1j * az * m)), atol=1e-12)


def test_chaotic_top_size():
    f = floquet(TopParams.chaotic(20))
    assert f.dim == 41 and len(eigenphases(f)) == 41


@pytest.mark.parametrize("j", [1, 5.5, 20])
def test_two_exponential_routes_agree(j):
    p = TopParams((0.4, -1.3, 2.2), (3.0, -7.0, 12.0), j)
    for h in kick_generators(p):
        np.testing.assert_allclose(expm_hermitian(h), scipy.linalg.expm(-1j * h), atol=1e-8)


def test_operator_order():
    # F = U_z U_y U_x: with only x and z kicks this is U_z U_x, not U_x U_z
    j = 3
    p = TopParams((0.9, 0, 0.4), (0, 0, 2.0), j)
    gx, _, gz = kick_generators(p)
    expected = scipy.linalg.expm(-1j * gz) @ scipy.linalg.expm(-1j * gx)
    np.testing.assert_allclose(floquet(p).data, expected, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(
    st.lists(st.floats(-2 * np.pi, 2 * np.pi), min_size=3, max_size=3),
    st.lists(st.floats(-20, 20), min_size=3, max_size=3),
    st.integers(0, 120),
)
def test_unitarity_over_parameter_box(alpha, tau, twice_j):
    f = floquet(TopParams(alpha, tau, twice_j / 2))
    assert unitarity_defect(f.data) <= 1e-10


@pytest.mark.slow
def test_unitarity_at_largest_spin():
    f = floquet(TopParams((2 * np.pi, -2 * np.pi, 1), (20, -20, 20), 250))
    assert unitarity_defect(f.data) <= 1e-10


def test_interpolation():
    pr, pc = TopParams.regular(10), TopParams.chaotic(10)
    assert interpolate_params(pr, pc, 0).vector == REGULAR
    assert interpolate_params(pr, pc, 1).vector == CHAOTIC
    mid = interpolate_params(pr, pc, 0.5).vector
    assert mid == pytest.approx((0.55, 0.5, 1, 2, 0, 10))
    with pytest.raises(ValueError):
        interpolate_params(pr, TopParams.chaotic(11), 0.5)
    with pytest.raises(ValueError):
        interpolate_params(pr, pc, 1.5)


def test_regular_walk_ends_farther_out():
    ends = [np.linalg.norm(eigenphase_walk(eigenphases(floquet(m(20)))).endpoint)
            for m in (TopParams.regular, TopParams.chaotic)]
    assert ends[0] > ends[1]


@pytest.mark.parametrize("j", [30, 100])
def test_regimes_in_band(j):
    band = 5 / math.sqrt(30)
    t0, _ = t_statistics(form_factor_series(eigenphases(floquet(TopParams.regular(j))), 30), 30)
    _, t1 = t_statistics(form_factor_series(eigenphases(floquet(TopParams.chaotic(j))), 30), 30)
    assert abs(t0 - 1) <= band
    assert abs(t1 - 1) <= band
