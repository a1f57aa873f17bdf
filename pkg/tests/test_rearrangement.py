import numpy as np
import pytest
from calderon.data.rearrangement import (
    cumulative,
    dilate,
    dilation_sum_bound,
    mu_at,
    mu_seq,
    mu_step,
    partial_sums,
    submajorization_constant,
    submajorizes,
    triangle_mu,
)
from calderon.data.sequences import Seq, harmonic
from calderon.data.step_functions import (
    DecreasingStep,
    StepFunction,
    dyadic_power_step,
    random_decreasing_step,
    random_step,
    step_from_function,
)
from calderon.utils.errors import DomainError
from tests.conftest import SEEDS


def test_step_function_validation():
    with pytest.raises(DomainError):
        StepFunction([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        StepFunction([2.0, 1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        StepFunction([1.0], [np.inf])
    with pytest.raises(DomainError):
        StepFunction([1.0, 2.0], [1.0])


def test_step_function_is_canonical():
    x = StepFunction([1.0, 2.0, 3.0], [1.0, 1.0, 0.0])
    assert x.breakpoints.tolist() == [2.0]
    assert x.values.tolist() == [1.0]
    assert StepFunction([1.0], [0.0]).is_zero()


def test_step_function_is_immutable():
    x = StepFunction([1.0], [1.0])
    with pytest.raises(AttributeError):
        x.values = np.array([2.0])
    with pytest.raises(ValueError):
        x.values[0] = 2.0


def test_evaluation_conventions():
    x = StepFunction([1.0, 2.0], [3.0, 1.0])
    assert x.evaluate(1.0) == 3.0
    assert x.evaluate_right_continuous(1.0) == 1.0
    assert x.evaluate(2.5) == 0.0
    assert x.evaluate(0.0) == 0.0
    np.testing.assert_array_equal(x.evaluate([0.5, 1.5]), [3.0, 1.0])


def test_arithmetic_on_merged_partition():
    x = StepFunction([1.0, 2.0], [1.0, 2.0])
    y = StepFunction([1.5], [1.0])
    total = x + y
    np.testing.assert_array_equal(total.breakpoints, [1.0, 1.5, 2.0])
    np.testing.assert_array_equal(total.values, [2.0, 3.0, 2.0])
    assert (x - x).is_zero()
    assert (2 * x).integral() == pytest.approx(2 * x.integral())
    assert abs(-x) == x


def test_integrals():
    x = StepFunction([1.0, 3.0], [2.0, -1.0])
    assert x.integral() == pytest.approx(0.0)
    assert x.integral_to(2.0) == pytest.approx(1.0)
    assert x.lp_norm(1) == pytest.approx(4.0)
    assert x.lp_norm(np.inf) == 2.0
    with pytest.raises(DomainError):
        x.lp_norm(0.5)


def test_serialization_rejects_unknown_keys():
    x = StepFunction([1.0, 2.0], [1.0, -1.0])
    assert StepFunction.from_dict(x.to_dict()) == x
    with pytest.raises(DomainError):
        StepFunction.from_dict({"breakpoints": [1.0], "values": [1.0], "extra": 1})


def test_decreasing_step_rejects_increase():
    with pytest.raises(DomainError):
        DecreasingStep([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        DecreasingStep([1.0], [-1.0])


def test_step_from_function_rules():
    x = step_from_function(lambda t: 1.0 / t, [1.0, 2.0], rule="left")
    np.testing.assert_allclose(x.values, [2.0, 1.0])
    x = step_from_function(lambda t: t, [1.0, 2.0], rule="right")
    np.testing.assert_allclose(x.values, [1.0, 2.0])
    x = step_from_function(lambda t: t, [1.0, 2.0], rule="mid")
    np.testing.assert_allclose(x.values, [0.5, 1.5])
    with pytest.raises(DomainError):
        step_from_function(lambda t: t, [1.0], rule="nearest")


def test_dyadic_power_step():
    x = dyadic_power_step(0.5, pieces=3)
    np.testing.assert_allclose(x.breakpoints, [0.25, 0.5, 1.0])
    np.testing.assert_allclose(x.values, [0.125**-0.5, 0.25**-0.5, 0.5**-0.5])
    with pytest.raises(DomainError):
        dyadic_power_step(0.5, pieces=0)


def test_mu_step_sorts_moduli():
    mu = mu_step(StepFunction([1.0, 2.0, 3.0], [1.0, -3.0, 2.0]))
    assert isinstance(mu, DecreasingStep)
    np.testing.assert_array_equal(mu.values, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(mu.breakpoints, [1.0, 2.0, 3.0])


def test_mu_step_skips_zero_pieces():
    mu = mu_step(StepFunction([1.0, 3.0, 3.5], [1.0, 0.0, 2.0]))
    np.testing.assert_array_equal(mu.values, [2.0, 1.0])
    np.testing.assert_allclose(mu.breakpoints, [0.5, 1.5])


def test_mu_of_zero():
    assert mu_step(StepFunction.zero()).is_zero()
    assert mu_at(StepFunction.zero(), 1.0) == 0.0


@pytest.mark.parametrize("seed", SEEDS)
def test_mu_step_is_idempotent_and_equimeasurable(seed):
    rng = np.random.default_rng(seed)
    x = random_step(rng, pieces=10)
    mu = mu_step(x)
    assert mu_step(mu) == mu
    assert mu_step(StepFunction(mu.breakpoints, mu.values)) == mu
    for p in (1, 2, 3.5, np.inf):
        assert mu.lp_norm(p) == pytest.approx(x.lp_norm(p), rel=1e-12)


def test_mu_at_is_right_continuous():
    x = StepFunction([1.0, 2.0], [2.0, 1.0])
    assert mu_at(x, 1.0) == 1.0
    assert mu_at(x, 0.0) == 2.0


def test_mu_seq():
    mu = mu_seq(Seq([1.0, -3.0, 2.0], offset=5))
    assert mu.offset == 0
    np.testing.assert_array_equal(mu.entries, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(partial_sums(Seq([1.0, -3.0, 2.0])), [3.0, 5.0, 6.0])
    assert mu_seq(Seq([1j, 0.5])).entries.tolist() == [1.0, 0.5]


def test_dilate():
    x = StepFunction([1.0, 2.0], [2.0, 1.0])
    assert dilate(x, 2.0).integral() == pytest.approx(2 * x.integral())
    assert isinstance(dilate(mu_step(x), 0.5), DecreasingStep)
    for s in (0.0, -1.0):
        with pytest.raises(DomainError):
            dilate(x, s)


def test_cumulative_is_exact():
    x = StepFunction([1.0, 2.0], [1.0, 3.0])
    np.testing.assert_allclose(cumulative(x, [0.5, 1.0, 1.5, 10.0]), [1.5, 3.0, 3.5, 4.0])


def test_submajorizes():
    x = StepFunction.indicator(0.0, 1.0, 2.0)
    y = StepFunction.indicator(0.0, 2.0, 1.0)
    assert submajorizes(x, y)
    assert not submajorizes(y, x)
    assert submajorizes(x, StepFunction.zero())


def _average_pairs(x: StepFunction) -> StepFunction:
    """Length-weighted average of |x| over consecutive pairs of pieces."""
    right = x.breakpoints
    lengths = np.diff(right, prepend=0.0)
    mass = np.abs(x.values) * lengths
    groups = np.arange(right.size) // 2
    merged = np.bincount(groups, weights=mass) / np.bincount(groups, weights=lengths)
    return StepFunction(right[np.r_[1 : right.size : 2, right.size - 1]][: merged.size], merged)


def _shrink(x: StepFunction, rng: np.random.Generator) -> StepFunction:
    return StepFunction(x.breakpoints, x.values * rng.uniform(0.0, 1.0, size=x.num_pieces))


@pytest.mark.parametrize("seed", SEEDS)
def test_submajorizes_is_a_preorder(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        x = random_step(rng, pieces=int(rng.integers(1, 12)))
        assert submajorizes(x, x)
        assert submajorizes(x, mu_step(x)) and submajorizes(mu_step(x), x)

        y = _average_pairs(x) if rng.random() < 0.5 else _shrink(x, rng)
        z = _shrink(_average_pairs(y), rng)
        assert submajorizes(x, y) and submajorizes(y, z)
        assert submajorizes(x, z)

    triples = [[random_step(rng, pieces=3, scale=1.0) for _ in range(3)] for _ in range(200)]
    for x, y, z in triples:
        if submajorizes(x, y) and submajorizes(y, z):
            assert submajorizes(x, z)


@pytest.mark.parametrize("seed", SEEDS)
def test_triangle_inequality_for_mu(seed):
    rng = np.random.default_rng(seed)
    x, y = random_step(rng), random_step(rng)
    for t, s in rng.uniform(0.01, 5.0, size=(20, 2)):
        assert triangle_mu(x, y, t, s)


def test_triangle_mu_rejects_nonpositive_arguments():
    x = StepFunction([1.0], [1.0])
    with pytest.raises(DomainError):
        triangle_mu(x, x, 0.0, 1.0)


@pytest.mark.parametrize("seed", SEEDS)
def test_dilation_sum_bound(seed):
    rng = np.random.default_rng(seed)
    xs = [random_step(rng, pieces=int(rng.integers(1, 6))) for _ in range(4)]
    assert dilation_sum_bound(xs)
    assert dilation_sum_bound([])


def test_submajorization_constant():
    assert submajorization_constant(np.array([2.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(2.0)
    assert submajorization_constant(np.array([1.0]), np.array([0.0])) == np.inf
    assert submajorization_constant(np.zeros(3), np.ones(3)) == 0.0


def test_random_decreasing_step_support():
    x = random_decreasing_step(np.random.default_rng(0), pieces=5, support=0.75)
    assert x.support_end == 0.75
    assert np.all(np.diff(x.values) <= 0)


def test_sequence_window():
    a = harmonic(3, start=2)
    assert a.offset == 2
    assert a[1] == 0.0
    assert a[2] == pytest.approx(1.0 / 3.0)
    np.testing.assert_allclose(a.values_on(0, 6), [0, 0, 1 / 3, 1 / 4, 1 / 5, 0])
    with pytest.raises(DomainError):
        Seq([])
    with pytest.raises(DomainError):
        Seq.from_dict({"entries": [1.0], "bogus": 0})
    z = Seq([1 + 2j, 3.0], offset=-1)
    assert Seq.from_dict(z.to_dict()) == z
