import logging
import numpy as np
from functools import lru_cache
from typing import List, Tuple
from calderon.utils.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

BACKENDS = ("jacobi", "lapack")
EPS = np.finfo(float).eps


@lru_cache(maxsize=64)
def round_robin(n: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    """Tournament ordering of all index pairs of range(n) into rounds of disjoint pairs.

    Every pair (p, q), p < q, appears exactly once per sweep; within a round no index repeats, so the
    rotations of a round can be applied simultaneously.
    """
    players: List[int] = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (min(players[i], players[size - 1 - i]), max(players[i], players[size - 1 - i]))
            for i in range(size // 2)
            if players[i] >= 0 and players[size - 1 - i] >= 0
        ]
        p = np.array([pair[0] for pair in pairs], dtype=int)
        q = np.array([pair[1] for pair in pairs], dtype=int)
        p.flags.writeable = False
        q.flags.writeable = False
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _tangent(zeta: np.ndarray) -> np.ndarray:
    """Smaller root of t^2 + 2 zeta t - 1 = 0."""
    sign = np.where(zeta >= 0, 1.0, -1.0)
    return sign / (np.abs(zeta) + np.sqrt(1.0 + zeta**2))


def jacobi_svd(
    A: np.ndarray,
    compute_uv: bool = True,
    tol: float = 1e-12,
    max_sweeps: int = 60,
):
    """One-sided Jacobi SVD of a complex matrix.

    Columns of W = A V are orthogonalized pairwise by plane rotations until every pair satisfies
    |a_p^H a_q| <= tol * ‖a_p‖ ‖a_q‖. Pairs in which one column is negligible relative to ‖A‖_F are
    left alone. Returns ``s`` (descending), or ``(U, s, V)`` with A = U diag(s) V^H.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2:
        raise DomainError("expected a 2-d matrix")
    rows, cols = A.shape
    if rows < cols:
        result = jacobi_svd(A.conj().T, compute_uv=compute_uv, tol=tol, max_sweeps=max_sweeps)
        if not compute_uv:
            return result
        U, s, V = result
        return V, s, U

    W = A.copy()
    V = np.eye(cols, dtype=complex) if compute_uv else None
    norm_f = np.linalg.norm(A)
    floor = (EPS * norm_f) ** 2

    converged = norm_f == 0 or cols < 2
    sweep = 0
    while not converged:
        if sweep == max_sweeps:
            raise NumericalError(f"Jacobi SVD did not converge in {max_sweeps} sweeps (n={cols})")
        sweep += 1
        rotations = 0
        for p, q in round_robin(cols):
            ap, aq = W[:, p], W[:, q]
            alpha = np.einsum("ij,ij->j", ap.conj(), ap).real
            beta = np.einsum("ij,ij->j", aq.conj(), aq).real
            gamma = np.einsum("ij,ij->j", ap.conj(), aq)
            magnitude = np.abs(gamma)
            active = (magnitude > tol * np.sqrt(alpha * beta)) & (np.minimum(alpha, beta) > floor)
            if not active.any():
                continue
            rotations += int(active.sum())
            p, q = p[active], q[active]
            ap, aq = ap[:, active], aq[:, active]
            magnitude = magnitude[active]
            phase = np.exp(-1j * np.angle(gamma[active]))
            t = _tangent((beta[active] - alpha[active]) / (2.0 * magnitude))
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = c * t
            aq = aq * phase
            W[:, p] = c * ap - s * aq
            W[:, q] = s * ap + c * aq
            if compute_uv:
                vp, vq = V[:, p], V[:, q] * phase
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        converged = rotations == 0
        logger.debug(f"Jacobi SVD sweep {sweep}: {rotations} rotations")

    singular = np.linalg.norm(W, axis=0)
    order = np.argsort(-singular, kind="stable")
    singular = singular[order]
    if not compute_uv:
        return singular
    W, V = W[:, order], V[:, order]
    U = np.zeros_like(W)
    nonzero = singular > 0
    U[:, nonzero] = W[:, nonzero] / singular[nonzero]
    return U, singular, V


def jacobi_eigh(
    A: np.ndarray,
    tol: float = 1e-12,
    max_sweeps: int = 60,
):
    """Cyclic Jacobi eigendecomposition of a hermitian matrix.

    Each pivot (p, q) is annihilated by G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] with φ = arg A[p, q];
    rounds of disjoint pivots are applied together. Stops once the off-diagonal Frobenius mass is at
    most tol * ‖A‖_F. Returns eigenvalues in ascending order and the unitary of eigenvectors.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DomainError("expected a square matrix")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    norm_f = np.linalg.norm(A)

    def off(M):
        return np.sqrt(max(np.linalg.norm(M) ** 2 - np.linalg.norm(np.diag(M)) ** 2, 0.0))

    sweep = 0
    while n > 1 and off(A) > tol * norm_f:
        if sweep == max_sweeps:
            raise NumericalError(f"Jacobi eigendecomposition did not converge in {max_sweeps} sweeps (n={n})")
        sweep += 1
        for p, q in round_robin(n):
            g = A[p, q]
            magnitude = np.abs(g)
            active = magnitude > 0
            if not active.any():
                continue
            p, q, g, magnitude = p[active], q[active], g[active], magnitude[active]
            alpha, beta = A[p, p].real, A[q, q].real
            phase = np.exp(-1j * np.angle(g))
            t = _tangent((beta - alpha) / (2.0 * magnitude))
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = c * t

            # A <- A G
            col_p, col_q = A[:, p].copy(), A[:, q] * phase
            A[:, p] = c * col_p - s * col_q
            A[:, q] = s * col_p + c * col_q
            # A <- G^H A
            row_p, row_q = A[p, :].copy(), A[q, :] * phase.conj()[:, None]
            A[p, :] = c[:, None] * row_p - s[:, None] * row_q
            A[q, :] = s[:, None] * row_p + c[:, None] * row_q
            A[p, q] = 0.0
            A[q, p] = 0.0

            v_p, v_q = V[:, p].copy(), V[:, q] * phase
            V[:, p] = c * v_p - s * v_q
            V[:, q] = s * v_p + c * v_q
        logger.debug(f"Jacobi eigh sweep {sweep}: off = {off(A):.3e}")

    eigenvalues = np.diag(A).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], V[:, order]


def svd(A: np.ndarray, backend: str = "jacobi", compute_uv: bool = True):
    """SVD through the in-repo Jacobi routine or numpy's LAPACK driver; same return convention for both."""
    if backend == "jacobi":
        return jacobi_svd(A, compute_uv=compute_uv)
    if backend == "lapack":
        try:
            if not compute_uv:
                return np.linalg.svd(A, compute_uv=False)
            U, s, Vh = np.linalg.svd(A)
        except np.linalg.LinAlgError as err:
            raise NumericalError(f"LAPACK SVD failed: {err}") from err
        return U, s, Vh.conj().T
    raise DomainError(f"unknown SVD backend '{backend}', expected one of {BACKENDS}")


def eigh(A: np.ndarray, backend: str = "jacobi"):
    if backend == "jacobi":
        return jacobi_eigh(A)
    if backend == "lapack":
        try:
            return np.linalg.eigh(A)
        except np.linalg.LinAlgError as err:
            raise NumericalError(f"LAPACK eigh failed: {err}") from err
    raise DomainError(f"unknown eigh backend '{backend}', expected one of {BACKENDS}")


# ---------------------------------------------------------------------------
# random ensembles


def ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def gue(rng: np.random.Generator, n: int) -> np.ndarray:
    G = ginibre(rng, n)
    return 0.5 * (G + G.conj().T)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(rng, n))
    diagonal = np.diag(R)
    return Q * (diagonal / np.abs(diagonal))
