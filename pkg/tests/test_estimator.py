import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from tangentlab import banach as B
from tangentlab import estimator as E
from tangentlab import martingale as M
from tangentlab import probspace as P

SCALAR = B.Lp(1, 2)


def fixture_kernel():
    """Scalar Paley-Walsh kernel with f_1 = 1, f_2 = 1 + r_1, f_3 = 2 + r_1 - r_2 / 2."""
    gens = [np.ones((1, 1)), lambda s: 1 + s[0], lambda s: 2 + s[0] - 0.5 * s[1]]
    return M.paley_walsh_kernel(gens, SCALAR)


def oracle_args(k):
    ar, pr = oracles.space_data(k.space)
    return oracles.kernel_fn(k), ar, pr, k.N


# exact engine ----------------------------------------------------------------------

def test_lp_norm_exact_examples():
    sp = P.rademacher(2)
    c = np.tile([3.0, -4.0], (4, 1))
    assert E.lp_norm_exact(c, 1.5, sp, B.Lp(2, 2)) == pytest.approx(5.0)
    assert E.lp_norm_exact(sp.labels(0), 3.0, sp) == 1.0
    r1, r2 = sp.labels(0), sp.labels(1)
    assert E.lp_norm_exact(r1 + r2 * (1 + r1), 1.0, sp) == 1.5


def test_p_range():
    sp = P.rademacher(1)
    with pytest.raises(ValueError):
        E.lp_norm_exact(sp.labels(0), 0.5, sp)
    with pytest.raises(ValueError):
        E.decoupling_ratio(fixture_kernel(), math.inf)


def test_decoupling_ratio_fixture():
    k = fixture_kernel()
    est = E.decoupling_ratio(k, 1.0)
    # exhaustive enumeration over 2^3 x 2^3 atoms gives 36/35
    assert est.value == pytest.approx(oracles.decoupling_ratio(*oracle_args(k), 1.0, lambda v: abs(v[0])), abs=1e-14)
    assert est.value == pytest.approx(36 / 35, abs=1e-14)
    assert est.engine == "exact" and est.std_error is None
    assert est.fingerprint == k.fingerprint
    assert est.extra["reverse"] * est.value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_n1_ratio_is_one(p):
    k = M.random_kernel(P.uniform(1, 3), B.Lp(3, 1), np.random.default_rng(int(p)))
    assert E.decoupling_ratio(k, p).value == pytest.approx(1.0, abs=1e-10)


def test_hilbert_p2_ratio_is_one():
    k = M.random_kernel(P.uniform(3, 3), B.Lp(3, 2), np.random.default_rng(5))
    assert E.decoupling_ratio(k, 2.0).value == pytest.approx(1.0, abs=1e-10)


def test_degenerate_status():
    est = E.decoupling_ratio(M.zero_kernel(P.rademacher(2), SCALAR), 1.0)
    assert est.degenerate and math.isnan(est.value)
    assert E.weak_type_constant(M.zero_kernel(P.rademacher(2), SCALAR)).degenerate


def test_ratio_upto_n():
    k = fixture_kernel()
    est = E.decoupling_ratio(k, 1.0, N=2)
    ef, eg = oracles.moments_fg(*oracle_args(k), 1.0, lambda v: abs(v[0]), upto=2)
    assert est.value == pytest.approx(ef / eg, abs=1e-14)


def test_weak_type_examples():
    sp = P.rademacher(1)
    k = M.GeneratorKernel(sp, SCALAR, sp.labels(0)[None, :, None])
    assert E.weak_type_constant(k).value == 1.0
    fk = fixture_kernel()
    w = E.weak_type_constant(fk)
    assert w.value == pytest.approx(oracles.weak_type(*oracle_args(fk), lambda v: abs(v[0])), abs=1e-14)
    assert w.value == pytest.approx(4 / 7, abs=1e-14)


def test_sup_comparison_examples():
    k = M.random_kernel(P.rademacher(1), B.Lp(2, 1), np.random.default_rng(0))
    s = E.sup_comparison(k, 1.0)
    assert s.lhs == pytest.approx(s.rhs, abs=1e-15)
    assert s.factor == 4.0
    assert E.sup_comparison(k, 2.0).factor == pytest.approx(2 ** 1.5)
    fk = fixture_kernel()
    s = E.sup_comparison(fk, 1.0)
    lhs, rhs = oracles.sup_sides(*oracle_args(fk), 1.0, lambda v: abs(v[0]))
    assert s.lhs == pytest.approx(lhs, abs=1e-14) and s.rhs == pytest.approx(rhs, abs=1e-14)
    assert s.holds()


# Monte Carlo ------------------------------------------------------------------------

def test_mc_examples():
    z = M.zero_kernel(P.rademacher(2), SCALAR)
    assert E.lp_norm_mc(z, "f", 1.0, 1000, 0).value == 0.0
    sp = P.rademacher(1)
    k = M.GeneratorKernel(sp, SCALAR, sp.labels(0)[None, :, None])
    est = E.lp_norm_mc(k, "f", 2.0, 10_000, 3)
    assert est.value == 1.0 and est.std_error == 0.0
    with pytest.raises(ValueError):
        E.lp_norm_mc(k, "f", 2.0, 1, 3)


def test_mc_determinism_and_workers():
    k = M.random_kernel(P.uniform(3, 3), B.Lp(2, 1), np.random.default_rng(2))
    a = E.mc_samples(k, "g", 1.5, 10_000, seed=42)
    b = E.mc_samples(k, "g", 1.5, 10_000, seed=42, workers=3)
    assert np.array_equal(a, b)
    est = E.lp_norm_mc(k, "g", 1.5, 10_000, seed=42)
    assert est.std_error == pytest.approx(np.std(a, ddof=1) / 100)
    assert est.seed == 42 and est.samples == 10_000


def test_mc_matches_exact():
    k = fixture_kernel()
    pair = M.decouple(k)
    f, g = E.pair_sums(pair)
    for which, vals in (("f", f), ("g", g)):
        exact = E.lp_norm_exact(vals, 1.0, pair.doubled, SCALAR)
        est = E.lp_norm_mc(k, which, 1.0, 20_000, seed=1)
        assert abs(est.value - exact) < 4 * est.std_error
    r = E.decoupling_ratio(k, 1.0, engine="mc", samples=20_000, seed=1)
    assert abs(r.value - 36 / 35) < 4 * r.std_error


# good-lambda probe -----------------------------------------------------------------

def test_good_lambda_fixture():
    k = fixture_kernel()
    f = np.abs(np.cumsum(k.h[:, :, 0], axis=0)).max(axis=0)
    lam = float(np.median(f))
    assert lam == 2.5
    r = E.good_lambda_probe(k, 0.5, 2.0, lam)
    assert r.tangent and r.ci
    assert r.p_fstar_gt_lambda == 0.25
    assert r.rhs_corrected == pytest.approx((3 * 0.5 * 2.5) * 0.25)
    assert r.rhs_displayed == pytest.approx(3 * 0.5 * 0.25)
    assert r.lhs_moment == 0.0 and r.slack >= 0 and r.event_slack >= 0
    assert r.inclusion_violations == 0


def test_good_lambda_trivial_cases():
    k = M.random_kernel(P.rademacher(3), B.Lp(2, 1), np.random.default_rng(8))
    r = E.good_lambda_probe(k, 0.5, 2.0, 1e9)
    assert r.p_fstar_gt_lambda == 0 and r.lhs_moment == 0 and r.rhs_corrected == 0
    r = E.good_lambda_probe(k, 0.0, 2.0, 1.0)
    assert r.lhs_moment == 0.0
    with pytest.raises(ValueError):
        E.good_lambda_probe(k, 0.5, 1.5, 1.0)


@given(st.integers(0, 2**31), st.floats(0.01, 4.0), st.floats(0.01, 2.0), st.floats(0.05, 1.0),
       st.sampled_from([1.0, 2.0]))
def test_good_lambda_slacks_nonnegative(seed, delta, extra, frac, p):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(3, 6))
    k = M.random_kernel(P.uniform(N, 2 if N > 3 else 3), B.Lp(2, 1), rng, scale_spread=1.5)
    lam = frac * float(np.asarray(B.norm(np.cumsum(k.h, axis=0), k.banach)).max())
    r = E.good_lambda_probe(k, delta, 1 + delta + extra, lam, p)
    assert r.tangent and r.ci
    assert r.slack >= -1e-12 and r.conditional_slack >= -1e-12
    assert r.inclusion_violations == 0 and r.event_slack >= 0


# properties ---------------------------------------------------------------------------

kernels = st.builds(
    lambda seed, N, arity, s: M.random_kernel(P.uniform(N, arity), s, np.random.default_rng(seed)),
    st.integers(0, 2**31), st.integers(1, 3), st.sampled_from([2, 3]),
    st.sampled_from([SCALAR, B.Lp(2, 1), B.Lp(3, B.INF), B.NestedL1((0.5, 1.0), B.Lp(2, 2))]),
)


@given(kernels, st.sampled_from([1.0, 1.5, 2.0]), st.integers(0, 2**31))
def test_exact_engine_permutation_invariant(k, p, seed):
    pair = M.decouple(k)
    f, g = E.pair_sums(pair)
    perm = np.random.default_rng(seed).permutation(len(f))
    probs = pair.doubled.probs
    a = E.moment_exact(f, p, probs, k.banach)
    b = E.moment_exact(f[perm], p, probs[perm], k.banach)
    assert abs(a - b) < 1e-12 * max(1.0, a)


@given(kernels, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_exact_ratio_matches_oracle(k, p):
    nrm = oracles.norm_for(k.banach)
    assert E.decoupling_ratio(k, p).value == pytest.approx(
        oracles.decoupling_ratio(*oracle_args(k), p, nrm), rel=1e-10)


@given(kernels)
def test_directions_multiply_to_one(k):
    est = E.decoupling_ratio(k, 1.0)
    assert abs(est.value * est.extra["reverse"] - 1.0) < 1e-10


@given(kernels)
def test_markov_consistency(k):
    assert E.weak_type_constant(k).value <= E.decoupling_ratio(k, 1.0).value + 1e-10


@given(kernels, st.sampled_from([1.0, 2.0]))
def test_sup_comparison_bound(k, p):
    assert E.sup_comparison(k, p).holds()
