import pickle
import numpy as np
import pytest
from calderon.models.matrix import (
    LipschitzFn,
    MatrixOp,
    block_pinching_removal,
    commutator,
    divided_difference,
    doi_schur,
    lipschitz_commutator_check,
    lipschitz_difference_check,
    matrix_function,
    parse_lipschitz,
    schatten_norm,
    singular_values,
    svd_residual,
    triangular_truncate,
)
from calderon.utils.errors import DegenerateInputError, DomainError
from calderon.utils.linalg import ginibre, gue, haar_unitary
from tests.conftest import SEEDS


def test_matrix_op_validation_and_io():
    with pytest.raises(DomainError):
        MatrixOp(np.ones((2, 3)))
    with pytest.raises(DomainError):
        MatrixOp([[np.nan]])
    with pytest.raises(DomainError):
        MatrixOp.from_dict({"n": 3, "re": [[1.0]]})
    A = MatrixOp([[1.0, 2j], [0.5, -1.0]])
    assert MatrixOp.from_dict(A.to_dict()) == A
    assert MatrixOp.from_dict({"re": [[1.0, 0.0], [0.0, 1.0]]}).is_hermitian()
    with pytest.raises(ValueError):
        A.entries[0, 0] = 0.0


def test_singular_values_are_cached_and_pickle(random_matrix):
    A = MatrixOp(random_matrix)
    first = A.singular_values()
    assert A.singular_values() is first
    clone = pickle.loads(pickle.dumps(A))
    np.testing.assert_array_equal(clone.singular_values(), first)


def test_singular_values_as_sequence(random_matrix):
    A = MatrixOp(random_matrix)
    mu = singular_values(A)
    assert mu.offset == 0
    assert np.all(np.diff(mu.entries) <= 0)
    assert svd_residual(A) < 1e-12
    assert svd_residual(MatrixOp(np.zeros((3, 3)))) == 0.0


def test_triangular_truncation_rule():
    V = MatrixOp(np.arange(1.0, 10.0).reshape(3, 3))
    expected = np.array([[0.0, -2.0, -3.0], [4.0, 0.0, -6.0], [7.0, 8.0, 0.0]])
    np.testing.assert_array_equal(triangular_truncate(V).entries, expected)
    np.testing.assert_array_equal(block_pinching_removal(V).entries, np.abs(expected))


def test_block_truncation():
    V = MatrixOp(np.ones((4, 4)))
    T = triangular_truncate(V, block=2).entries
    np.testing.assert_array_equal(T[:2, :2], 0.0)
    np.testing.assert_array_equal(T[2:, :2], 1.0)
    np.testing.assert_array_equal(T[:2, 2:], -1.0)
    P = block_pinching_removal(V, block=2).entries
    np.testing.assert_array_equal(P[:2, 2:], 1.0)
    with pytest.raises(DomainError):
        triangular_truncate(V, block=0)


def test_weak_ratio_of_all_ones():
    V = MatrixOp(np.ones((2, 2)))
    ratio = schatten_norm(triangular_truncate(V), "weak-l1") / schatten_norm(V, "lp:1")
    assert ratio == pytest.approx(1.0)


@pytest.mark.parametrize("seed", SEEDS)
def test_truncation_is_isometric_off_diagonal_in_frobenius(seed):
    A = MatrixOp(ginibre(np.random.default_rng(seed), 6))
    zero_diagonal = MatrixOp(A.entries - np.diag(np.diag(A.entries)))
    assert schatten_norm(triangular_truncate(zero_diagonal), "lp:2") == schatten_norm(zero_diagonal, "lp:2")


@pytest.mark.parametrize("seed", SEEDS)
def test_pinching_removal_at_most_doubles(seed):
    A = MatrixOp(ginibre(np.random.default_rng(seed), 8))
    for text in ("lp:1", "lp:inf", "lp:1.5"):
        assert schatten_norm(block_pinching_removal(A, 3), text) <= 2.0 * schatten_norm(A, text) * (1 + 1e-12)


def test_schatten_norm_matches_numpy(random_matrix):
    A = MatrixOp(random_matrix)
    s = np.linalg.svd(random_matrix, compute_uv=False)
    assert schatten_norm(A, "lp:1") == pytest.approx(s.sum(), rel=1e-10)
    assert schatten_norm(A, "lp:inf", backend="lapack") == pytest.approx(s[0], rel=1e-12)
    assert schatten_norm(A, "lp:2") == pytest.approx(np.sqrt(np.sum(s**2)), rel=1e-12)
    assert schatten_norm(A, "weak-l1/d") == schatten_norm(A, "weak-l1")


@pytest.mark.parametrize("seed", SEEDS)
def test_schatten_norm_is_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    A = ginibre(rng, 8)
    U, W = haar_unitary(rng, 8), haar_unitary(rng, 8)
    for text in ("lp:1", "lp:1.5", "lp:inf", "weak-l1", "m1inf", "lorentz:log1p"):
        assert schatten_norm(MatrixOp(U @ A @ W), text) == pytest.approx(schatten_norm(MatrixOp(A), text), rel=1e-8)


def test_lipschitz_functions():
    rng = np.random.default_rng(0)
    for text in ("identity", "abs", "sin", "square:3", "pwl:-1,0,2:0,1,0"):
        f = parse_lipschitz(text)
        assert f.check(rng, scale=3.0)
    assert parse_lipschitz("pwl:-1,0,2:0,1,0").lipschitz == 1.0
    assert parse_lipschitz("square:3").lipschitz == 6.0
    for text in ("cos", "pwl:1,2", "square", "abs:2"):
        with pytest.raises(DomainError):
            parse_lipschitz(text)
    with pytest.raises(DomainError):
        LipschitzFn(np.abs, -1.0)


def test_divided_difference():
    lam = np.array([-1.0, 0.0, 0.0, 2.0])
    dd = divided_difference(lam, LipschitzFn.absolute())
    assert dd[0, 3] == pytest.approx(1.0 / 3.0)
    assert dd[1, 2] == 0.0
    assert np.all(np.diag(dd) == 0.0)
    assert np.all(np.abs(dd) <= 1.0)


@pytest.mark.parametrize("backend", ["jacobi", "lapack"])
def test_doi_transports_commutators(hermitian_pair, backend):
    A, B = (MatrixOp(M) for M in hermitian_pair)
    f = LipschitzFn.sine()
    left = doi_schur(A, f, commutator(A, B), backend)
    right = commutator(matrix_function(A, f, backend), B)
    np.testing.assert_allclose(left.entries, right.entries, atol=1e-10)


def test_doi_of_identity_is_identity_map(hermitian_pair):
    A, B = (MatrixOp(M) for M in hermitian_pair)
    C = commutator(A, B)
    np.testing.assert_allclose(doi_schur(A, LipschitzFn.identity(), C).entries, C.entries, atol=1e-10)


@pytest.mark.parametrize("seed", SEEDS)
def test_commutator_bound_in_frobenius(seed):
    rng = np.random.default_rng(seed)
    A, B = MatrixOp(gue(rng, 10)), MatrixOp(gue(rng, 10))
    report = lipschitz_commutator_check(A, B, LipschitzFn.absolute())
    assert report.bound_holds
    assert report.ratio <= 1.0 + 1e-10
    assert report.doi_residual < 1e-10
    assert len(report.spectrum) == 10


def test_commutator_check_records_other_norms(hermitian_pair):
    A, B = (MatrixOp(M) for M in hermitian_pair)
    report = lipschitz_commutator_check(A, B, LipschitzFn.absolute(), spec_e="lp:1", spec_f="weak-l1")
    assert report.bound_holds is None
    assert report.spec_e == "lp:1"
    assert report.ratio > 0


def test_commutator_check_rejects_degenerate_input(random_matrix):
    A = MatrixOp(np.diag([1.0, 2.0, 3.0]))
    with pytest.raises(DegenerateInputError):
        lipschitz_commutator_check(A, MatrixOp(np.diag([3.0, 1.0, 0.0])), LipschitzFn.absolute())
    with pytest.raises(DomainError):
        lipschitz_commutator_check(MatrixOp(random_matrix), MatrixOp(random_matrix), LipschitzFn.absolute())


def test_difference_check(hermitian_pair):
    X, Y = (MatrixOp(M) for M in hermitian_pair)
    report = lipschitz_difference_check(X, Y, LipschitzFn.sine())
    assert report.bound_holds
    with pytest.raises(DegenerateInputError):
        lipschitz_difference_check(X, X, LipschitzFn.sine())
