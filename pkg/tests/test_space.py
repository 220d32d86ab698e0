import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hpotune.errors import (DimensionMismatch, DuplicateName, EmptyCategorical, InvertedRange,
                            LogUniformNonPositive, NonFiniteDomain)
from hpotune.rng import SeededRandomStream
from hpotune.space import (Categorical, ContinuousRange, IntegerRange, SearchSpace, Values, decode, encode,
                           enumerate_grid, round_half_away, sample, sample_encoded, validate)

from strategies_hyp import space_and_config, spaces

GRID = SearchSpace([
    ("n_estimators", Values([50, 100, 150, 200, 250])),
    ("max_features", Values([1, 3, 5, 8])),
    ("max_depth", Values([1, 2, 4, 8])),
    ("criterion", Categorical(["entropy", "gini"])),
])
RANGE = SearchSpace([
    ("n_estimators", IntegerRange(50, 400)),
    ("max_features", IntegerRange(4, 10)),
    ("max_depth", IntegerRange(4, 10)),
    ("criterion", Categorical(["entropy", "gini"])),
])


# ---------------------------------------------------------------- validation

def test_duplicate_parameter_name_is_rejected():
    with pytest.raises(DuplicateName, match="max_depth"):
        SearchSpace([("max_depth", IntegerRange(1, 2)), ("max_depth", IntegerRange(3, 4))])


@pytest.mark.parametrize("domain, error", [
    (Categorical([]), EmptyCategorical),
    (IntegerRange(5, 4), InvertedRange),
    (ContinuousRange(1.0, 0.5), InvertedRange),
    (ContinuousRange(0.0, 1.0, log=True), LogUniformNonPositive),
])
def test_invalid_domains_name_the_parameter(domain, error):
    with pytest.raises(error, match="bad"):
        SearchSpace([("bad", domain)])


def test_empty_name_rejected():
    with pytest.raises(DuplicateName):
        SearchSpace([("", IntegerRange(1, 2))])


@pytest.mark.parametrize("domain", [IntegerRange(50, 400), ContinuousRange(0.1, 0.1), Categorical(["gini"])])
def test_valid_domains(domain):
    validate(SearchSpace([("x", domain)]))


# ---------------------------------------------------------------- sampling

def test_range_space_samples_in_bounds():
    rng = SeededRandomStream(3)
    for _ in range(500):
        c = sample(RANGE, rng)
        assert 50 <= c["n_estimators"] <= 400
        assert 4 <= c["max_features"] <= 10 and 4 <= c["max_depth"] <= 10
        assert c["criterion"] in ("entropy", "gini")
        assert RANGE.contains(c)


def test_single_value_domain_always_returned():
    space = SearchSpace([("criterion", Categorical(["gini"]))])
    assert all(sample(space, s) == {"criterion": "gini"} for s in range(20))


def test_sampling_is_deterministic_per_seed():
    a = [sample(RANGE, SeededRandomStream(42)) for _ in range(2)]
    assert a[0] == a[1]
    assert sample(RANGE, SeededRandomStream(43)) != a[0] or sample(RANGE, SeededRandomStream(44)) != a[0]


@given(spaces(), st.integers(0, 2**32))
def test_ten_thousand_samples_stay_in_domain(space, seed):
    enc = sample_encoded(space, seed, 10_000)
    lo, hi = space.bounds()
    assert np.all(enc >= lo) and np.all(enc <= hi)
    for row in enc[:50]:
        assert space.contains(decode(space, row))


@given(spaces(max_size=3), st.integers(0, 2**32))
def test_sample_draws_are_in_domain(space, seed):
    rng = SeededRandomStream(seed)
    for _ in range(50):
        assert space.contains(sample(space, rng))


def test_integer_sampling_covers_endpoints_uniformly():
    space = SearchSpace([("k", IntegerRange(0, 3))])
    draws = sample_encoded(space, 5, 40_000)[:, 0]
    freq = np.bincount(draws.astype(int), minlength=4) / len(draws)
    assert np.allclose(freq, 0.25, atol=0.01)


def test_log_uniform_sampling_is_uniform_in_log():
    space = SearchSpace([("lr", ContinuousRange(1e-4, 1.0, log=True))])
    x = np.log10(sample_encoded(space, 9, 40_000)[:, 0])
    assert abs(np.mean(x < -2) - 0.5) < 0.01


# ---------------------------------------------------------------- grids

def test_table_grid_has_160_configs_in_lexicographic_order():
    grid = enumerate_grid(GRID)
    assert len(grid) == 160
    assert grid[0] == {"n_estimators": 50, "max_features": 1, "max_depth": 1, "criterion": "entropy"}
    assert grid[1]["criterion"] == "gini"
    assert grid[-1] == {"n_estimators": 250, "max_features": 8, "max_depth": 8, "criterion": "gini"}
    assert len({GRID.key(c) for c in grid}) == 160


def test_single_axis_grid_keeps_listed_order():
    assert enumerate_grid(SearchSpace([("c", Categorical(["entropy", "gini"]))])) == [
        {"c": "entropy"}, {"c": "gini"}]


def test_continuous_grid_rejected():
    with pytest.raises(NonFiniteDomain):
        enumerate_grid(SearchSpace([("a", Values([1, 2])), ("x", ContinuousRange(0, 1))]))


@given(spaces(max_size=3))
def test_grid_size_is_product_and_unique(space):
    if not space.is_finite:
        with pytest.raises(NonFiniteDomain):
            enumerate_grid(space)
        return
    sizes = [d.size for _, d in space.params]
    if math.prod(sizes) > 20_000:
        return
    grid = enumerate_grid(space)
    assert len(grid) == math.prod(sizes)
    assert len({space.key(c) for c in grid}) == len(grid)


# ---------------------------------------------------------------- encoding

def test_encode_decode_paper_example():
    c = {"n_estimators": 50, "max_features": 4, "max_depth": 4, "criterion": "entropy"}
    v = encode(RANGE, c)
    assert v.tolist() == [50.0, 4.0, 4.0, 0.0]
    assert decode(RANGE, v) == c


def test_decode_clips_and_rounds():
    assert decode(RANGE, [500.0, 4, 4, 0])["n_estimators"] == 400
    assert decode(RANGE, [-3.0, 4, 4, 0])["n_estimators"] == 50
    assert decode(RANGE, [50, 4, 4, 0.6])["criterion"] == "gini"
    assert decode(RANGE, [50, 4, 4, 0.4])["criterion"] == "entropy"
    assert decode(RANGE, [50.5, 4, 4, 0])["n_estimators"] == 51  # half away from zero


def test_round_half_away_from_zero():
    assert list(round_half_away(np.array([0.5, 1.5, 2.5, -0.5, -2.5, 2.4]))) == [1, 2, 3, -1, -3, 2]


def test_wrong_length_rejected():
    with pytest.raises(DimensionMismatch):
        decode(RANGE, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        encode(RANGE, {"n_estimators": 50})


@given(space_and_config())
def test_round_trip(sc):
    space, config = sc
    assert decode(space, encode(space, config)) == config


@given(spaces(), st.data())
def test_any_vector_decodes_into_domain(space, data):
    v = data.draw(st.lists(st.floats(-1e7, 1e7), min_size=space.dim, max_size=space.dim))
    assert space.contains(decode(space, v))


def test_config_file_representation_round_trips():
    space = SearchSpace.from_dicts(RANGE.to_dicts() + [{"name": "lr", "kind": "float", "low": 1e-3, "high": 1, "log": True}])
    assert SearchSpace.from_dicts(space.to_dicts()) == space
    assert SearchSpace.from_dicts(GRID.to_dicts()) == GRID
