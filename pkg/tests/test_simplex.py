import numpy as np
import pytest
from calderon.utils.errors import DomainError, NumericalError
from calderon.utils.simplex import MAX_VARIABLES, SOLVERS, bland_simplex, linprog


@pytest.mark.parametrize("solver", SOLVERS)
def test_small_program(solver):
    result = linprog([-1.0, -1.0], A_ub=[[1.0, 2.0], [3.0, 1.0]], b_ub=[4.0, 6.0], solver=solver)
    assert result.fun == pytest.approx(-2.8)
    np.testing.assert_allclose(result.x, [1.6, 1.2], atol=1e-9)


def test_degenerate_program_does_not_cycle():
    c = [-0.75, 20.0, -0.5, 6.0]
    A_ub = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    result = bland_simplex(c, A_ub, [0.0, 0.0, 1.0])
    assert result.status == 0
    assert result.fun == pytest.approx(-1.25)


def test_equality_and_negative_rhs():
    result = linprog([1.0, 2.0], A_ub=[[-1.0, -1.0]], b_ub=[-1.0], A_eq=[[1.0, -1.0]], b_eq=[0.0])
    assert result.fun == pytest.approx(1.5)
    np.testing.assert_allclose(result.x, [0.5, 0.5], atol=1e-12)


def test_infeasible_and_unbounded():
    assert bland_simplex([1.0], A_ub=[[1.0]], b_ub=[-1.0]).status == 2
    with pytest.raises(NumericalError):
        linprog([1.0], A_ub=[[1.0]], b_ub=[-1.0])
    with pytest.raises(NumericalError):
        linprog([-1.0])


def test_solver_validation():
    with pytest.raises(DomainError):
        linprog(np.zeros(MAX_VARIABLES + 1), solver="bland")
    with pytest.raises(DomainError):
        linprog([1.0], solver="cplex")
    with pytest.raises(DomainError):
        bland_simplex([1.0, 1.0], A_ub=[[1.0]], b_ub=[1.0])
