import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from radbound.family_lab import (
    ConstantFamily,
    FiniteRandom,
    LinearBall,
    LipschitzBall,
    ProjectedFamily,
    SamplePlan,
    draw_sample,
    family_from_config,
    from_table,
    minus_family,
    project,
)


def test_sample_plan_validation():
    with pytest.raises(ValueError):
        SamplePlan(n=0)
    with pytest.raises(ValueError):
        SamplePlan(n=3, dim=0)


def test_draw_sample_examples():
    one = draw_sample(SamplePlan(n=1, seed=7))
    assert one.n == 1 and 0 <= one.points[0, 0] <= 1 and one.weights.sum() == 1.0
    a = draw_sample(SamplePlan(n=4, dim=2, seed=7))
    b = draw_sample(SamplePlan(n=4, dim=2, seed=7))
    np.testing.assert_array_equal(a.points, b.points)
    big = draw_sample(SamplePlan(n=10_000, seed=3))
    assert abs(big.points.mean() - 0.5) <= 3 / math.sqrt(12 * 10_000)


def test_project_examples():
    zero = project(LinearBall(d=2, radius=0.0), draw_sample(SamplePlan(5, 2, 1)))
    assert zero.m == 1 and np.all(zero.values == 0)
    pf = project(FiniteRandom(m=5, b=1.0), draw_sample(SamplePlan(3, 1, 2)))
    assert pf.values.shape == (5, 3) and np.abs(pf.values).max() <= 1.0


def _brute_lipschitz_rows(lipschitz, b, resolution, x):
    step = lipschitz / resolution
    top = math.floor(b / step + 1e-9)
    rows = set()
    for start in range(-top, top + 1):
        for moves in itertools.product((-1, 0, 1), repeat=resolution):
            path = np.cumsum((start,) + moves)
            if np.abs(path).max() > top:
                continue
            vals = np.interp(x, np.linspace(0, 1, resolution + 1), path * step)
            rows.add(tuple(np.round(vals / 1e-12).astype(np.int64)))
    return len(rows)


def test_lipschitz_ball_row_count_matches_enumeration():
    sample = draw_sample(SamplePlan(n=4, seed=11))
    pf = project(LipschitzBall(1.0, 1.0, 8), sample)
    assert pf.m == _brute_lipschitz_rows(1.0, 1.0, 8, sample.points[:, 0])


def test_lipschitz_paths_are_lipschitz():
    spec = LipschitzBall(2.0, 1.0, 4)
    x = np.linspace(0, 1, 101)
    vals = spec.evaluate(x)
    assert np.abs(np.diff(vals, axis=1)).max() <= 2.0 * 0.01 + 1e-12
    assert np.abs(vals).max() <= 1.0


def test_finite_random_second_moments():
    spec = FiniteRandom(m=6, b=1.5, seed=4)
    x = (np.arange(20_000) + 0.5) / 20_000
    np.testing.assert_allclose(np.mean(spec.evaluate(x) ** 2, axis=1), spec.population_second_moments(), atol=1e-9)


def test_declared_regimes():
    assert LinearBall(d=3).declared_regime.kind == "logpoly"
    assert LinearBall(d=3).declared_regime.d == 3 and LinearBall(d=3).declared_regime.p == 1
    assert LipschitzBall().declared_regime.kind == "poly" and LipschitzBall().declared_regime.p == 1


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        project(LinearBall(d=2), draw_sample(SamplePlan(3, 1, 0)))


def test_from_config_roundtrip():
    for spec in (FiniteRandom(m=3, b=0.5, seed=2), LinearBall(d=2, radius=0.5, count=3),
                 LipschitzBall(1.0, 0.5, 2), ConstantFamily((0.0, 0.25))):
        cfg = {k: str(v) for k, v in spec.to_config().items()}
        assert family_from_config(cfg) == spec
    with pytest.raises(ValueError):
        family_from_config({"variant": "nope"})
    with pytest.raises(ValueError):
        family_from_config({"variant": "finite_random", "m": "2", "colour": "red"})


def test_minus_family_examples():
    single = minus_family(from_table([[0.3, -0.2]]))
    assert single.m == 1 and np.all(single.values == 0)
    two = minus_family(from_table([[1.0, 0.0], [0.0, 1.0]]))
    assert two.m == 3
    assert minus_family(from_table([[1, 0], [0, 1], [1, 1]])).m == 7
    assert two.sup_bound == 2.0


def test_minus_family_cap_keeps_zero_row():
    rng = np.random.default_rng(0)
    pf = from_table(rng.uniform(-1, 1, (30, 4)))
    capped = minus_family(pf, cap=50, seed=1)
    assert capped.m == 50 and capped.subsampled
    assert np.any(np.all(capped.values == 0, axis=1))


def test_projected_family_guards():
    with pytest.raises(ValueError):
        ProjectedFamily(np.array([[2.0]]), 1.0)
    pf = from_table([[0.5, 0.5]])
    with pytest.raises(ValueError):
        pf.values[0, 0] = 1.0


def test_dedup_tolerance():
    pf = from_table([[0.1, 0.2], [0.1, 0.2], [0.1, 0.2 + 1e-9]])
    assert pf.m == 2


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.floats(-1, 1)))
def test_minus_family_properties(values):
    pf = from_table(values)
    mf = minus_family(pf)
    assert 1 <= mf.m <= pf.m ** 2
    assert np.abs(mf.values).max() <= mf.sup_bound
    assert np.any(np.all(np.abs(mf.values) <= 1e-12, axis=1))
    keys = {tuple(np.round(r / 1e-12).astype(np.int64)) for r in mf.values}
    for row in mf.values:
        assert tuple(np.round(-row / 1e-12).astype(np.int64)) in keys


def test_project_deterministic():
    spec = FiniteRandom(m=7, seed=3)
    sample = draw_sample(SamplePlan(6, 1, 9))
    np.testing.assert_array_equal(project(spec, sample).values, project(spec, sample).values)
