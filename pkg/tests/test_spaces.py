import numpy as np
import pytest
from calderon.data.rearrangement import mu_step
from calderon.data.sequences import Seq, flat, harmonic
from calderon.data.step_functions import StepFunction, random_step
from calderon.models.spaces import (
    PhiSpec,
    SpaceSpec,
    llogl_functional,
    norm,
    parse_phi,
    parse_space,
    sup_p_blowup,
)
from calderon.utils.errors import DomainError, UnsupportedNormError
from tests.conftest import SEEDS


@pytest.mark.parametrize(
    "text,expected",
    [
        ("lp:1.5", SpaceSpec.lp(1.5)),
        ("lp:inf", SpaceSpec.lp(np.inf)),
        ("weak-l1/d", SpaceSpec.weak_l1(discrete=True)),
        ("m1inf", SpaceSpec.m1inf()),
        ("marcinkiewicz:tloge", SpaceSpec.marcinkiewicz(PhiSpec.tloge())),
        ("lorentz:pwl:1,2:3,2,1", SpaceSpec.lorentz(PhiSpec.piecewise_linear([1, 2], [3, 2, 1]))),
        ("L1+Linf", SpaceSpec.l1_plus_linf()),
    ],
)
def test_parse_space(text, expected):
    assert parse_space(text) == expected


@pytest.mark.parametrize("text", ["lp:1.5", "lp:inf", "weak-l1/d", "lorentz:pwl:1.0,2.0:3.0,2.0,1.0", "marcinkiewicz:psi/d"])
def test_space_names_parse_back(text):
    spec = parse_space(text)
    assert parse_space(str(spec)) == spec


@pytest.mark.parametrize("text", ["lp", "lp:0.5", "lp:abc", "hardy", "weak-l1:2", "lorentz", "lorentz:log1p:3"])
def test_parse_space_rejects(text):
    with pytest.raises(DomainError):
        parse_space(text)


def test_phi_must_be_concave_and_increasing():
    with pytest.raises(DomainError):
        PhiSpec.piecewise_linear([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        PhiSpec.piecewise_linear([1.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        PhiSpec.piecewise_linear([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        parse_phi("pwl:1,2")


def test_phi_values():
    np.testing.assert_allclose(PhiSpec.tloge()([0.0, 1.0, 5.0]), [0.0, 1.0, 1.0])
    assert PhiSpec.psi()(1.0) == pytest.approx(2.0)
    assert PhiSpec.psi()(np.e) == pytest.approx(4.0)
    pwl = PhiSpec.piecewise_linear([1.0, 2.0], [3.0, 2.0, 1.0])
    np.testing.assert_allclose(pwl([0.5, 1.0, 1.5, 3.0]), [1.5, 3.0, 4.0, 6.0])
    assert pwl.slope_at_zero == 3.0
    assert PhiSpec.tloge().slope_at_zero == np.inf


def test_function_norms_of_indicator(indicator):
    assert norm(indicator, "lp:1") == pytest.approx(1.0)
    assert norm(indicator, "lp:inf") == 1.0
    assert norm(indicator, "weak-l1") == 1.0
    assert norm(indicator, "m1inf") == pytest.approx(1.0 / np.log(2.0), rel=1e-8)
    assert norm(indicator, "marcinkiewicz:tloge") == pytest.approx(1.0, rel=1e-8)
    assert norm(indicator, "lorentz:log1p") == pytest.approx(np.log(2.0))
    assert norm(indicator, "l1^linf") == 1.0
    assert norm(indicator, "l1+linf") == 1.0


def test_l1_plus_linf_is_mass_on_unit_interval():
    x = StepFunction([0.5, 3.0], [4.0, 1.0])
    assert norm(x, "l1+linf") == pytest.approx(2.5)
    assert norm(x, "l1^linf") == pytest.approx(4.5)


def test_weak_l1_attained_at_right_endpoints():
    x = StepFunction([1.0, 4.0], [2.0, 1.0])
    assert norm(x, "weak-l1") == pytest.approx(4.0)


def test_sequence_norms_of_harmonic():
    a = harmonic(3)
    assert norm(a, "weak-l1/d") == pytest.approx(1.0)
    assert norm(a, "lp:1/d") == pytest.approx(11.0 / 6.0)
    assert norm(a, "lorentz:log1p/d") == pytest.approx(1.0 + 1.0 / 4.0 + 1.0 / 9.0)
    assert norm(a, "m1inf/d") == pytest.approx(1.0 / np.log(2.0))
    assert norm(a, "l1+linf/d") == 1.0


def test_norm_realization_must_match():
    with pytest.raises(UnsupportedNormError):
        norm(harmonic(3), "lp:1")
    with pytest.raises(UnsupportedNormError):
        norm(StepFunction([1.0], [1.0]), "lp:1/d")
    with pytest.raises(UnsupportedNormError):
        norm(harmonic(3), "lorentz:tloge/d")


def test_zero_has_zero_norm():
    for text in ("lp:2", "weak-l1", "m1inf", "lorentz:psi"):
        assert norm(StepFunction.zero(), text) == 0.0
    assert norm(Seq([0.0, 0.0]), "m1inf/d") == 0.0


@pytest.mark.parametrize("seed", SEEDS)
def test_norms_are_rearrangement_invariant(seed):
    rng = np.random.default_rng(seed)
    x = random_step(rng)
    flipped = StepFunction(x.breakpoints, -x.values)
    for text in ("lp:1.5", "weak-l1", "m1inf", "lorentz:log1p", "l1+linf"):
        assert norm(flipped, text) == pytest.approx(norm(x, text), rel=1e-12)
    a = Seq(rng.standard_normal(12))
    b = Seq(a.entries[::-1], offset=-7)
    for text in ("lp:3/d", "weak-l1/d", "m1inf/d", "lorentz:psi/d"):
        assert norm(b, text) == pytest.approx(norm(a, text), rel=1e-12)


def test_marcinkiewicz_dominates_its_right_endpoint_ratios():
    x = StepFunction([0.3, 1.0, 2.5], [5.0, 2.0, 1.0])
    value = norm(x, "m1inf")
    for t in (0.3, 1.0, 2.5):
        assert value >= x.integral_to(t) / np.log1p(t) - 1e-12


def test_sup_p_blowup():
    a = flat(4)
    assert sup_p_blowup(a, [2.0]) == pytest.approx(2.0)
    assert sup_p_blowup(harmonic(100), [1.5, 2.0]) > 0
    assert sup_p_blowup(Seq([0.0]), [2.0]) == 0.0
    for grid in ([], [1.0], [2.5]):
        with pytest.raises(DomainError):
            sup_p_blowup(a, grid)


def test_llogl_functional():
    assert llogl_functional(StepFunction([0.5], [np.e])) == pytest.approx(0.5 * np.e)
    assert llogl_functional(StepFunction([2.0], [np.e])) == pytest.approx(np.e)
    assert llogl_functional(StepFunction([1.0], [0.5])) == 0.0


@pytest.mark.parametrize("seed", SEEDS)
def test_l1_plus_linf_below_every_l_one_plus_eps(seed):
    x = random_step(np.random.default_rng(seed))
    value = norm(x, "l1+linf")
    for eps in (1e-3, 0.1, 0.5, 0.9):
        assert value <= norm(x, f"lp:{1 + eps}") * (1 + 1e-12)


def test_lp_projection_bound_against_psi():
    eps = np.geomspace(1e-4, 1 - 1e-4, 4000)
    psi = PhiSpec.psi()
    for t in np.geomspace(1e-6, 1.0, 25):
        assert np.min(t ** (1.0 / (1.0 + eps)) / eps) <= np.e * psi(t)


BANACH_SPACES = ["lp:1", "lp:1.5", "lp:inf", "m1inf", "marcinkiewicz:tloge", "lorentz:log1p", "lorentz:tloge", "l1+linf", "l1^linf"]
ALL_SPACES = BANACH_SPACES + ["weak-l1", "lorentz:psi", "lorentz:pwl:1,2:3,2,1"]
SEQUENCE_SPACES = ["lp:1.5/d", "lp:inf/d", "m1inf/d", "lorentz:log1p/d", "l1+linf/d", "l1^linf/d"]
# the Marcinkiewicz norms go through a bounded scalar search
SEARCH_RTOL = 1e-8


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("text", BANACH_SPACES)
def test_triangle_inequality(seed, text):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        x, y = random_step(rng, pieces=int(rng.integers(1, 10))), random_step(rng, pieces=int(rng.integers(1, 10)))
        assert norm(x + y, text) <= (norm(x, text) + norm(y, text)) * (1 + SEARCH_RTOL)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("text", SEQUENCE_SPACES)
def test_triangle_inequality_for_sequences(seed, text):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, 16))
    assert norm(Seq(a + b), text) <= (norm(Seq(a), text) + norm(Seq(b), text)) * (1 + 1e-12)


@pytest.mark.parametrize("seed", SEEDS)
def test_weak_l1_quasi_triangle(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x, y = random_step(rng), random_step(rng)
        assert norm(x + y, "weak-l1") <= 2.0 * (norm(x, "weak-l1") + norm(y, "weak-l1")) * (1 + 1e-12)
        a, b = rng.standard_normal((2, 12))
        assert norm(Seq(a + b), "weak-l1/d") <= 2.0 * (norm(Seq(a), "weak-l1/d") + norm(Seq(b), "weak-l1/d")) * (1 + 1e-12)


def test_weak_l1_is_not_subadditive():
    x = StepFunction([1.0, 2.0], [1.0, 0.5])
    y = StepFunction([1.0, 2.0], [0.5, 1.0])
    assert norm(x + y, "weak-l1") > norm(x, "weak-l1") + norm(y, "weak-l1")


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("text", ALL_SPACES)
def test_monotone_and_homogeneous(seed, text):
    rng = np.random.default_rng(seed)
    x = random_step(rng, pieces=int(rng.integers(1, 10)))
    y = StepFunction(x.breakpoints, x.values * rng.uniform(-1.0, 1.0, size=x.num_pieces))
    assert norm(y, text) <= norm(x, text) * (1 + SEARCH_RTOL)
    for c in (-2.5, 0.1, 7.0):
        assert norm(StepFunction(x.breakpoints, c * x.values), text) == pytest.approx(abs(c) * norm(x, text), rel=SEARCH_RTOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_llogl_functional_matches_midpoint_quadrature(seed):
    rng = np.random.default_rng(seed)
    x = random_step(rng, pieces=int(rng.integers(2, 12)), max_length=0.5)
    # μ log₊ μ is decreasing, so the midpoint error is at most h/2 times its total variation
    size = 4_000_000
    grid = (np.arange(size) + 0.5) / size
    mu = mu_step(x).evaluate(grid)
    quadrature = float(np.mean(mu * np.log(np.maximum(mu, 1.0))))
    assert llogl_functional(x) == pytest.approx(quadrature, abs=1e-6)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("text", ["m1inf", "marcinkiewicz:tloge", "marcinkiewicz:pwl:0.5,2:4,1,0.25"])
def test_marcinkiewicz_maximum_sits_at_piece_endpoints(seed, text):
    x = random_step(np.random.default_rng(seed))
    mu = mu_step(x)
    phi = parse_space(text).phi
    endpoints = max(mu.values[0] / phi.slope_at_zero, float(np.max(mu.cumulative(mu.breakpoints) / phi(mu.breakpoints))))
    assert norm(x, text) == pytest.approx(endpoints, rel=1e-12)
