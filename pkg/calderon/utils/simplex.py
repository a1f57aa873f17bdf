import logging
import numpy as np
from scipy.optimize import OptimizeResult, linprog as scipy_linprog
from calderon.utils.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

SOLVERS = ("bland", "highs")
MAX_VARIABLES = 512


def _pivot(tableau: np.ndarray, row: int, col: int):
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _run_phase(tableau: np.ndarray, basis: np.ndarray, allowed: np.ndarray, tol: float, max_iter: int) -> int:
    """Bland's rule iterations on ``tableau`` (objective in the last row). Returns the pivot count."""
    iterations = 0
    while True:
        costs = tableau[-1, :-1]
        candidates = np.flatnonzero(allowed & (costs < -tol))
        if candidates.size == 0:
            return iterations
        col = candidates[0]
        column = tableau[:-1, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise NumericalError("linear program is unbounded")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = ties[np.argmin(basis[ties])]
        _pivot(tableau, row, col)
        basis[row] = col
        iterations += 1
        if iterations >= max_iter:
            raise NumericalError(f"simplex did not terminate within {max_iter} pivots")


def bland_simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-9, max_iter: int = 100_000):
    """Dense two-phase tableau simplex for min c^T x s.t. A_ub x <= b_ub, A_eq x = b_eq, x >= 0.

    Bland's smallest-index rule is used for both the entering and the leaving variable, so the method
    cannot cycle and is deterministic. Returns a scipy ``OptimizeResult`` (x, fun, status, nit, message).
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape != (b_ub.size, n) or A_eq.shape != (b_eq.size, n):
        raise DomainError("constraint matrices do not match the objective and right-hand sides")

    m_ub, m_eq = b_ub.size, b_eq.size
    m = m_ub + m_eq
    A = np.vstack((np.hstack((A_ub, np.eye(m_ub))), np.hstack((A_eq, np.zeros((m_eq, m_ub))))))
    b = np.concatenate((b_ub, b_eq))
    flipped = b < 0
    A[flipped] *= -1.0
    b[flipped] *= -1.0

    # rows whose slack cannot start in the basis get an artificial variable
    needs_artificial = flipped | (np.arange(m) >= m_ub)
    artificial_rows = np.flatnonzero(needs_artificial)
    n_core = n + m_ub
    n_art = artificial_rows.size
    artificial = np.zeros((m, n_art))
    artificial[artificial_rows, np.arange(n_art)] = 1.0

    tableau = np.zeros((m + 1, n_core + n_art + 1))
    tableau[:m, :n_core] = A
    tableau[:m, n_core:-1] = artificial
    tableau[:m, -1] = b
    basis = np.where(needs_artificial, 0, n + np.arange(m))
    basis[artificial_rows] = n_core + np.arange(n_art)

    iterations = 0
    if n_art:
        tableau[-1, n_core:-1] = 1.0
        tableau[-1] -= tableau[artificial_rows].sum(axis=0)
        allowed = np.ones(n_core + n_art, dtype=bool)
        iterations += _run_phase(tableau, basis, allowed, tol, max_iter)
        if -tableau[-1, -1] > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            return OptimizeResult(
                x=None, fun=np.nan, status=2, nit=iterations, success=False, message="linear program is infeasible"
            )
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for row in np.flatnonzero(basis >= n_core):
            entries = np.abs(tableau[row, :n_core])
            columns = np.flatnonzero(entries > tol)
            if columns.size:
                _pivot(tableau, row, columns[0])
                basis[row] = columns[0]
            else:
                keep[row] = False
        tableau = np.delete(tableau[keep], np.s_[n_core:-1], axis=1)
        basis = basis[keep[:-1]]

    tableau[-1] = 0.0
    tableau[-1, :n] = c
    tableau[-1] -= c[basis[basis < n]] @ tableau[:-1][basis < n] if np.any(basis < n) else 0.0
    iterations += _run_phase(tableau, basis, np.ones(n_core, dtype=bool), tol, max_iter)

    x = np.zeros(n_core)
    x[basis] = tableau[:-1, -1]
    x = np.clip(x[:n], 0.0, None)
    logger.debug(f"simplex finished after {iterations} pivots ({m} rows, {n} variables)")
    return OptimizeResult(
        x=x, fun=float(c @ x), status=0, nit=iterations, success=True, message="optimization terminated"
    )


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, solver: str = "bland"):
    """min c^T x over x >= 0 with the in-repo simplex or scipy's HiGHS; failures raise NumericalError."""
    if solver == "bland":
        if np.size(c) > MAX_VARIABLES:
            raise DomainError(f"the dense simplex takes at most {MAX_VARIABLES} variables, got {np.size(c)}")
        result = bland_simplex(c, A_ub, b_ub, A_eq, b_eq)
    elif solver == "highs":
        result = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    else:
        raise DomainError(f"unknown LP solver '{solver}', expected one of {SOLVERS}")
    if result.status != 0:
        raise NumericalError(f"LP solver '{solver}' failed: {result.message}")
    return result
