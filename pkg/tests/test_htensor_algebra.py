import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kerrh import htensor_algebra as ha

vals = st.floats(min_value=-10, max_value=10, allow_nan=False)
vec2 = arrays(np.float64, (2,), elements=vals)
mat2 = arrays(np.float64, (2, 2), elements=vals)


# ------------------------------------------------------------ convention canaries
def test_dual_orientation_canary():
    assert ha.dual1(np.array([1.0, 0.0])) == pytest.approx([0.0, -1.0])


def test_hot_carries_one_half_canary():
    xi = np.array([1.0, 0.0])
    assert ha.hot1(xi, xi)[0, 0] == pytest.approx(0.5)
    assert ha.hot1(xi, xi)[0, 1] == pytest.approx(0.0)


def test_complex_types_are_anti_self_dual():
    F = ha.HVecC(np.array(1.3 - 0.2j))
    U = ha.HSym2C(np.array(0.4 + 0.9j))
    assert ha.dual1(F.arr) == pytest.approx(-1j * F.arr)
    assert ha.ldual2(U.arr) == pytest.approx(-1j * U.arr)


def test_decompose_pure_trace_and_antitrace():
    h, t, at, _ = ha.decompose(ha.H2TensorR.of(np.eye(2)))
    assert (float(t), float(at)) == (2.0, 0.0)
    assert h.arr == pytest.approx(np.zeros((2, 2)))
    h, t, at, _ = ha.decompose(ha.H2TensorR.of(ha.EPS))
    assert (float(t), float(at)) == (0.0, 2.0)


# ------------------------------------------------------------ property tests
@settings(max_examples=200)
@given(vec2)
def test_double_dual_is_minus_identity(w):
    assert ha.dual1(ha.dual1(w)) == pytest.approx(-w, abs=1e-13)


@settings(max_examples=200)
@given(mat2)
def test_trace_of_dual_is_minus_antitrace(U):
    assert ha.tr(ha.ldual2(U)) == pytest.approx(-ha.atr(U), abs=1e-12)


@settings(max_examples=200)
@given(mat2)
def test_decompose_reassembles(U):
    h, t, at, _ = ha.decompose(ha.H2TensorR.of(U))
    assert ha.reassemble(h, t, at).arr == pytest.approx(U, abs=1e-13)


@settings(max_examples=200)
@given(vec2, vec2)
def test_wedge_antisymmetric_and_dual_hot_symmetric(x, y):
    assert ha.wedge1(x, y) == pytest.approx(-ha.wedge1(y, x), abs=1e-12)
    assert ha.hot1(ha.dual1(x), y) == pytest.approx(ha.hot1(x, ha.dual1(y)), abs=1e-12)


@settings(max_examples=100)
@given(vec2, vec2)
def test_sym_product_with_itself(a, b):
    u = ha.HSym2R(a[0], b[0]).arr
    assert ha.matmul2(u, u) == pytest.approx(0.5 * ha.dot2(u, u) * np.eye(2), abs=1e-10)


def test_zero_input_gives_exact_zero():
    z = ha.HSym2R(np.zeros(3), np.zeros(3))
    assert np.all(ha.sym_product_identity(z, z) == 0)


def test_algebra_suite_meets_tolerance():
    res = ha.algebra_suite(np.random.default_rng(7), 1000)
    assert len(res) > 30
    worst = {k: float(np.max(v)) for k, v in res.items()}
    assert max(worst.values()) <= 1e-13, max(worst.items(), key=lambda kv: kv[1])


def test_algebra_suite_is_seed_deterministic():
    a = ha.algebra_suite(np.random.default_rng(3), 50)
    b = ha.algebra_suite(np.random.default_rng(3), 50)
    assert all(np.array_equal(a[k], b[k]) for k in a)

