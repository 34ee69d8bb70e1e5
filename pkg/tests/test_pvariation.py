import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from livsic import (FourierSum, GridFunction, InvalidP, PiecewiseLinear,
                    StepFunction, p_variation)
from livsic.observables import Homeomorphism

from oracles import brute_force_pvar


def test_indicator_total_variation():
    # one jump up, one jump down
    ind = StepFunction.indicator(0.3, 0.6)
    res = p_variation(ind, 1.0)
    assert res.value == 2.0
    assert abs(res.recompute() - res.value) < 1e-12


def test_monotone_collapses_to_endpoints():
    f = PiecewiseLinear(np.array([0.0, 1.0]), np.array([0.2, 1.7]))
    for p in (1.0, 1.5, 2.0, 3.0):
        res = p_variation(f, p)
        assert res.value == pytest.approx(1.5, abs=1e-12)
        assert len(res.witness_x) == 2


def test_invalid_p():
    with pytest.raises(InvalidP):
        p_variation(np.array([0.0, 1.0]), 0.5)


def test_dp_matches_brute_force_random(rng):
    for _ in range(60):
        vals = rng.uniform(-1, 1, int(rng.integers(3, 13)))
        for p in (1.0, 1.5, 2.0):
            assert p_variation(vals, p).value == brute_force_pvar(vals, p)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=10),
       st.sampled_from([1.0, 1.25, 2.0, 3.0]))
def test_dp_matches_brute_force_hypothesis(values, p):
    # adversarial inputs (values straddling zero) can shift the reduced
    # chain by one ulp against the exhaustive sum, hence the spacing bound;
    # random samples agree exactly (see test above and the acceptance run)
    vals = np.asarray(values)
    got = p_variation(vals, p).value
    ref = brute_force_pvar(vals, p)
    assert abs(got - ref) <= 4 * np.spacing(max(abs(ref), 1.0))


def test_witness_reproduces_value(rng):
    for _ in range(20):
        vals = rng.normal(size=300)
        res = p_variation(vals, 2.0)
        assert abs(res.recompute() - res.value) < 1e-12
        # witness points must be an increasing subsequence of the sample
        assert np.all(np.diff(res.witness_x) > 0)


def test_pseudo_norm_properties(rng):
    # triangle inequality and absolute homogeneity on sampled pairs
    for _ in range(200):
        n = int(rng.integers(4, 40))
        f = rng.normal(size=n)
        g = rng.normal(size=n)
        c = float(rng.uniform(-3, 3))
        for p in (1.0, 2.0):
            vf = p_variation(f, p).value
            vg = p_variation(g, p).value
            vfg = p_variation(f + g, p).value
            assert vfg <= vf + vg + 1e-10
            assert p_variation(c * f, p).value == pytest.approx(abs(c) * vf, rel=1e-12)


def test_variation_nonincreasing_in_p(rng):
    for _ in range(50):
        vals = rng.normal(size=int(rng.integers(5, 60)))
        vs = [p_variation(vals, p).value for p in (1.0, 1.5, 2.0, 3.0)]
        for a, b in zip(vs[:-1], vs[1:]):
            assert b <= a + 1e-10


def test_sup_bound_for_mean_zero(rng):
    # sup|f - mean| <= v_p(f) on samples
    for _ in range(100):
        vals = rng.normal(size=int(rng.integers(4, 50)))
        vals -= vals.mean()
        for p in (1.0, 2.0):
            assert np.max(np.abs(vals)) <= p_variation(vals, p).value + 1e-12


def test_homeomorphism_invariance_exact():
    # v_p(f o H) = v_p(f) when the sample is pulled through H point-to-point
    f = StepFunction.indicator(0.3, 0.6)
    h = Homeomorphism(lambda x: np.asarray(x) ** 2,
                      lambda y: np.sqrt(np.asarray(y)), (0.0, 1.0), name="square")
    ys = np.linspace(0.0, 1.0, 1001)          # sample for the transported side
    xs = h.forward(ys)                         # corresponding sample for f
    from livsic import transport

    g = transport(f, h)                        # g = f o H
    for p in (1.0, 2.0):
        assert p_variation(g, p, ys).value == p_variation(f, p, xs).value
    # the transported indicator jumps at sqrt(0.3), sqrt(0.6)
    assert p_variation(g, 1.0).value == 2.0


def test_grid_function_default_sample():
    g = GridFunction(np.array([0.0, 1.0, 0.0, 1.0]), (0.0, 1.0))
    res = p_variation(g, 1.0)
    assert res.value == 3.0


def test_fourier_variation_values():
    f = FourierSum({1: (1.0, 0.0)})
    assert p_variation(f, 1.0).value == pytest.approx(4.0, abs=1e-5)
    assert p_variation(f, 2.0).value == pytest.approx(np.sqrt(8.0), abs=1e-5)
