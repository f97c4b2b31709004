import pytest
from hypothesis import given, strategies as st

from cantordim import ProductMeasure, lebesgue
from cantordim.measures import mu_valid_indices


def test_lebesgue_uniform():
    assert lebesgue(7).probs == tuple([1 / 7] * 7)
    assert lebesgue(2).probs == (0.5, 0.5)
    assert sum(lebesgue(4).probs) == 1.0


def test_lebesgue_rejects_small_base():
    with pytest.raises(ValueError):
        lebesgue(1)


def test_valid_indices_examples():
    assert mu_valid_indices(ProductMeasure((0, 0.5, 0, 0.5, 0, 0, 0))) == (1, 3)
    assert mu_valid_indices(lebesgue(7)) == tuple(range(7))
    assert mu_valid_indices(ProductMeasure((1, 0))) == (0,)


@pytest.mark.parametrize("probs", [(0.5, 0.6), (-0.1, 1.1), (1.0,)])
def test_invalid_measures(probs):
    with pytest.raises(ValueError):
        ProductMeasure(probs)


def test_from_weights_normalises():
    m = ProductMeasure.from_weights([1, 0, 3])
    assert m.probs == (0.25, 0.0, 0.75)


@given(st.lists(st.integers(0, 5), min_size=2, max_size=12).filter(lambda w: sum(w) > 0))
def test_valid_indices_are_support(weights):
    m = ProductMeasure.from_weights(weights)
    assert mu_valid_indices(m) == tuple(i for i, w in enumerate(weights) if w > 0)
