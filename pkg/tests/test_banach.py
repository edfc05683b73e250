import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from tangentlab import banach as B


def test_norm_examples():
    assert B.norm(np.array([3.0, 4.0]), B.Lp(2, 2)) == pytest.approx(5.0)
    assert B.norm(np.array([1.0, -2.0]), B.Lp(2, B.INF)) == 2.0
    assert B.norm(np.array([2.0, -4.0]), B.NestedL1((0.5, 0.5), B.Lp(1, 1))) == pytest.approx(3.0)
    assert B.norm(np.array([1.0, 0.0, 0.0, -2.0]), B.TraceNorm(2)) == pytest.approx(3.0)


def test_norm_is_batched():
    v = np.arange(24, dtype=float).reshape(2, 3, 4) - 10
    out = B.norm(v, B.Lp(4, 3))
    assert out.shape == (2, 3)
    assert out[1, 2] == pytest.approx(oracles.lp_norm(v[1, 2], 3))


def test_axpy_examples():
    x = np.array([1.0, -2.0, 0.5])
    y = np.array([0.25, 3.0, -1.0])
    s = B.Lp(3, 2)
    assert np.array_equal(B.axpy(0.0, x, y, s), y)
    assert np.array_equal(B.axpy(1.0, x, np.zeros(3), s), x)
    assert np.array_equal(B.axpy(-1.0, x, x, s), np.zeros(3))
    with pytest.raises(B.DimensionError):
        B.axpy(1.0, x, y, B.Lp(2, 2))


def test_descriptor_errors():
    with pytest.raises(B.DescriptorError):
        B.Lp(2, 0.5)
    with pytest.raises(B.DescriptorError):
        B.Lp(0, 2)
    with pytest.raises(B.DescriptorError):
        B.NestedL1((0.5, -0.5), B.Lp(1, 1))
    with pytest.raises(B.DescriptorError):
        B.TraceNorm(B.MAX_TRACE_K + 1)
    with pytest.raises(B.DimensionError):
        B.norm(np.ones(3), B.Lp(2, 2))


def test_total_dims():
    assert B.NestedL1((1.0, 2.0, 3.0), B.Lp(2, 2)).total_dim == 6
    assert B.TraceNorm(3).total_dim == 9


@pytest.mark.parametrize("text", [
    "lp:dim=4,p=2", "lp:dim=8,p=inf", "l1of:weights=0.5,0.5;inner=lp:dim=2,p=2", "trace:k=2", "lp:dim=3,p=1.5",
])
def test_text_form_round_trip(text):
    s = B.parse_space(text)
    assert B.parse_space(B.format_space(s)) == s


def test_text_form_values():
    assert B.parse_space("lp:dim=8,p=inf") == B.Lp(8, B.INF)
    assert B.parse_space("l1of:weights=0.5,0.5;inner=lp:dim=2,p=2") == B.NestedL1((0.5, 0.5), B.Lp(2, 2))
    with pytest.raises(B.DescriptorError):
        B.parse_space("ball:r=1")


def test_embedding_is_isometric():
    rng = np.random.default_rng(0)
    for src in (B.Lp(2, 1), B.Lp(3, B.INF), B.TraceNorm(2), B.NestedL1((0.5, 0.5), B.Lp(2, 2))):
        dst = B.with_dim(src, B.size_of(src) + 2)
        v = rng.standard_normal((5, src.total_dim))
        assert np.allclose(B.norm(B.embed(v, src, dst), dst), B.norm(v, src), rtol=1e-14)


def test_is_hilbert():
    assert B.is_hilbert(B.Lp(3, 2)) and B.is_hilbert(B.Lp(1, 1))
    assert not B.is_hilbert(B.Lp(2, 1))


# properties ----------------------------------------------------------------------

spaces = st.one_of(
    st.builds(B.Lp, st.integers(1, 5), st.sampled_from([1.0, 1.5, 2.0, 3.0, B.INF])),
    st.builds(B.TraceNorm, st.integers(1, 4)),
    st.builds(lambda w, d, p: B.NestedL1(tuple(w), B.Lp(d, p)),
              st.lists(st.floats(0.1, 3.0), min_size=1, max_size=3), st.integers(1, 3), st.sampled_from([1.0, 2.0, B.INF])),
)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(spaces, st.data())
def test_triangle_inequality(s, data):
    u = data.draw(arrays(float, s.total_dim, elements=finite))
    v = data.draw(arrays(float, s.total_dim, elements=finite))
    assert B.norm(u + v, s) <= B.norm(u, s) + B.norm(v, s) + 1e-12 * (1 + B.norm(u, s) + B.norm(v, s))


# scales stay clear of the subnormal range, where |a v|^p underflows
scales = st.one_of(st.just(0.0), st.floats(1e-6, 50), st.floats(-50, -1e-6))


@given(spaces, st.data(), scales)
def test_homogeneity(s, data, a):
    v = data.draw(arrays(float, s.total_dim, elements=finite))
    assert B.norm(a * v, s) == pytest.approx(abs(a) * B.norm(v, s), rel=1e-12, abs=1e-300)


@given(spaces, st.data())
def test_norm_matches_oracle(s, data):
    v = data.draw(arrays(float, s.total_dim, elements=finite))
    assert B.norm(v, s) == pytest.approx(oracles.norm_for(s)(v), rel=1e-9, abs=1e-9)


@given(st.builds(B.Lp, st.integers(1, 4), st.sampled_from([1.0, 2.0, 3.0, B.INF])), st.data())
def test_nested_single_unit_weight(inner, data):
    v = data.draw(arrays(float, inner.total_dim, elements=finite))
    assert B.norm(v, B.NestedL1((1.0,), inner)) == B.norm(v, inner)


@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_trace_norm_of_symmetric_matrix(k, seed):
    a = np.random.default_rng(seed).standard_normal((k, k))
    a = a + a.T
    eig = np.abs(np.linalg.eigvalsh(a)).sum()
    assert B.norm(a.ravel(), B.TraceNorm(k)) == pytest.approx(eig, abs=1e-9)
    assert math.isclose(oracles.trace_norm(a.ravel(), k), eig, abs_tol=1e-9)
