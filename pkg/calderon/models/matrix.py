import logging
import threading
import numpy as np
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union
from calderon.data.sequences import Seq
from calderon.models.spaces import SpaceSpec, norm, parse_space
from calderon.utils import linalg
from calderon.utils.errors import DegenerateInputError, DomainError

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-10
COINCIDENCE_RTOL = 1e-12


class MatrixOp:
    """Dense complex n x n matrix with lazily cached singular values."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise DomainError(f"expected a nonempty square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("matrix entries must be finite")
        entries.flags.writeable = False
        self._entries = entries
        self._singular_values: Dict[str, np.ndarray] = {}
        self._eigensystems: Dict[str, tuple] = {}
        self._lock = threading.Lock()

    def __getstate__(self):
        return {"entries": self._entries, "singular_values": dict(self._singular_values)}

    def __setstate__(self, state):
        self._entries = state["entries"]
        self._singular_values = state["singular_values"]
        self._eigensystems = {}
        self._lock = threading.Lock()

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    def singular_values(self, backend: str = "jacobi") -> np.ndarray:
        with self._lock:
            if backend not in self._singular_values:
                values = np.asarray(linalg.svd(self._entries, backend=backend, compute_uv=False), dtype=float)
                values.flags.writeable = False
                self._singular_values[backend] = values
            return self._singular_values[backend]

    def svd(self, backend: str = "jacobi"):
        return linalg.svd(self._entries, backend=backend, compute_uv=True)

    def eigh(self, backend: str = "jacobi"):
        """Cached (eigenvalues ascending, eigenvectors); only meaningful for hermitian entries."""
        with self._lock:
            if backend not in self._eigensystems:
                eigenvalues, vectors = linalg.eigh(self._entries, backend=backend)
                eigenvalues, vectors = np.asarray(eigenvalues, dtype=float), np.asarray(vectors, dtype=complex)
                eigenvalues.flags.writeable = False
                vectors.flags.writeable = False
                self._eigensystems[backend] = (eigenvalues, vectors)
            return self._eigensystems[backend]

    @property
    def adjoint(self):
        return MatrixOp(self._entries.conj().T)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self._entries))

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return np.linalg.norm(self._entries - self._entries.conj().T) <= rtol * max(self.frobenius(), 1e-300)

    def __matmul__(self, other):
        if not isinstance(other, MatrixOp):
            return NotImplemented
        return MatrixOp(self._entries @ other._entries)

    def __add__(self, other):
        if not isinstance(other, MatrixOp):
            return NotImplemented
        return MatrixOp(self._entries + other._entries)

    def __sub__(self, other):
        if not isinstance(other, MatrixOp):
            return NotImplemented
        return MatrixOp(self._entries - other._entries)

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return MatrixOp(alpha * self._entries)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, MatrixOp):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None

    def __repr__(self):
        return f"MatrixOp(n={self.n})"

    def to_dict(self) -> dict:
        return {"n": self.n, "re": self._entries.real.tolist(), "im": self._entries.imag.tolist()}

    @classmethod
    def from_dict(cls, data: dict):
        real = np.asarray(data["re"], dtype=float)
        imag = np.asarray(data.get("im", np.zeros_like(real)), dtype=float)
        if "n" in data and real.shape != (data["n"], data["n"]):
            raise DomainError(f"matrix declared n={data['n']} but 're' has shape {real.shape}")
        return cls(real + 1j * imag)


@dataclass(frozen=True)
class LipschitzFn:
    """Real function on the real line with a caller-certified Lipschitz bound."""

    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    name: str = "custom"

    def __post_init__(self):
        if not self.lipschitz >= 0:
            raise DomainError(f"Lipschitz bound must be nonnegative, got {self.lipschitz}")

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    @classmethod
    def identity(cls):
        return cls(lambda x: x, 1.0, "identity")

    @classmethod
    def absolute(cls):
        return cls(np.abs, 1.0, "abs")

    @classmethod
    def sine(cls):
        return cls(np.sin, 1.0, "sin")

    @classmethod
    def square(cls, radius: float):
        """x^2 restricted to [-radius, radius], where its Lipschitz bound is 2 * radius."""
        return cls(np.square, 2.0 * float(radius), f"square:{radius:g}")

    @classmethod
    def piecewise_linear(cls, knots, values):
        """Linear interpolation through (knots, values), constant outside the knots."""
        knots, values = np.asarray(knots, dtype=float), np.asarray(values, dtype=float)
        if knots.size < 2 or knots.shape != values.shape or np.any(np.diff(knots) <= 0):
            raise DomainError("piecewise linear functions need >= 2 strictly increasing knots with matching values")
        slope = float(np.max(np.abs(np.diff(values) / np.diff(knots))))
        return cls(lambda x: np.interp(x, knots, values), slope, "pwl")

    def check(self, rng: np.random.Generator, samples: int = 1000, scale: float = 10.0, rtol: float = 1e-12) -> bool:
        """|f(x) - f(y)| <= Lip(f) |x - y| on random pairs."""
        x, y = rng.uniform(-scale, scale, size=(2, samples))
        return bool(np.all(np.abs(self(x) - self(y)) <= self.lipschitz * np.abs(x - y) * (1 + rtol) + 1e-300))


def parse_lipschitz(text: str) -> LipschitzFn:
    """``identity``, ``abs``, ``sin``, ``square:<radius>`` or ``pwl:<knots>:<values>``."""
    name, _, rest = text.strip().lower().partition(":")
    if name in ("identity", "abs", "sin") and not rest:
        return {"identity": LipschitzFn.identity, "abs": LipschitzFn.absolute, "sin": LipschitzFn.sine}[name]()
    if name == "square" and rest:
        return LipschitzFn.square(float(rest))
    if name == "pwl":
        knots, sep, values = rest.partition(":")
        if sep:
            return LipschitzFn.piecewise_linear(
                [float(k) for k in knots.split(",")], [float(v) for v in values.split(",")]
            )
    raise DomainError(f"unknown Lipschitz function '{text}'")


def singular_values(A: MatrixOp, backend: str = "jacobi") -> Seq:
    """μ(A): descending singular values as a sequence at offset 0."""
    return Seq(A.singular_values(backend), 0)


def svd_residual(A: MatrixOp, backend: str = "jacobi") -> float:
    """‖A - U Σ V^H‖_F / ‖A‖_F."""
    U, s, V = A.svd(backend)
    scale = A.frobenius()
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(A.entries - (U * s) @ V.conj().T) / scale)


def _block_index(n: int, block: int) -> np.ndarray:
    if block < 1:
        raise DomainError(f"block size must be >= 1, got {block}")
    return np.arange(n) // block


def triangular_truncate(V: MatrixOp, block: int = 1) -> MatrixOp:
    """Σ_{j,k} sgn(j - k) P_j V P_k for the partition into consecutive blocks of ``block`` indices.

    With block = 1 this is the entrywise rule: diagonal zeroed, strictly lower part kept, strictly upper
    part negated.
    """
    idx = _block_index(V.n, block)
    signs = np.sign(idx[:, None] - idx[None, :])
    return MatrixOp(signs * V.entries)


def block_pinching_removal(V: MatrixOp, block: int = 1) -> MatrixOp:
    """V - Σ_k P_k V P_k; in every unitarily invariant norm the result is at most 2 ‖V‖."""
    idx = _block_index(V.n, block)
    return MatrixOp(np.where(idx[:, None] == idx[None, :], 0.0, V.entries))


def schatten_norm(A: MatrixOp, spec: Union[SpaceSpec, str], backend: str = "jacobi") -> float:
    """‖μ(A)‖ in the sequence realization of ``spec``."""
    if isinstance(spec, str):
        spec = parse_space(spec)
    if spec.kind == "lp" and spec.p == 2.0:
        # Σ σ_k^2 = Σ |a_ij|^2
        return A.frobenius()
    return norm(singular_values(A, backend), spec.as_discrete())


def _require_hermitian(A: MatrixOp, label: str = "A"):
    if not A.is_hermitian():
        raise DomainError(f"{label} must be hermitian (‖{label} - {label}*‖_F <= {HERMITIAN_RTOL:g} ‖{label}‖_F)")


def divided_difference(eigenvalues: np.ndarray, f: LipschitzFn) -> np.ndarray:
    """f^[1](λ_i, λ_j), set to 0 where the eigenvalues coincide."""
    lam = np.asarray(eigenvalues, dtype=float)
    values = f(lam)
    gaps = lam[:, None] - lam[None, :]
    scale = np.maximum(1.0, np.maximum(np.abs(lam)[:, None], np.abs(lam)[None, :]))
    coincident = np.abs(gaps) <= COINCIDENCE_RTOL * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (values[:, None] - values[None, :]) / gaps
    return np.where(coincident, 0.0, ratio)


def doi_schur(A: MatrixOp, f: LipschitzFn, V: MatrixOp, backend: str = "jacobi") -> MatrixOp:
    """Double operator integral T_{f^[1]}^{A,A}(V) = U (f^[1](Λ) ∘ U^H V U) U^H for hermitian A = U Λ U^H."""
    _require_hermitian(A)
    if V.n != A.n:
        raise DomainError(f"dimension mismatch: A is {A.n}x{A.n}, V is {V.n}x{V.n}")
    eigenvalues, U = A.eigh(backend)
    multiplier = divided_difference(eigenvalues, f)
    inner = U.conj().T @ V.entries @ U
    return MatrixOp(U @ (multiplier * inner) @ U.conj().T)


def matrix_function(A: MatrixOp, f: LipschitzFn, backend: str = "jacobi") -> MatrixOp:
    _require_hermitian(A)
    eigenvalues, U = A.eigh(backend)
    return MatrixOp((U * f(eigenvalues)) @ U.conj().T)


def commutator(A: MatrixOp, B: MatrixOp) -> MatrixOp:
    return MatrixOp(A.entries @ B.entries - B.entries @ A.entries)


@dataclass
class LipschitzReport:
    ratio: float
    numerator: float
    denominator: float
    n: int
    spec_e: str
    spec_f: str
    bound_holds: Optional[bool] = None
    doi_residual: Optional[float] = None
    spectrum: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _frobenius_pair(spec_e: SpaceSpec, spec_f: SpaceSpec) -> bool:
    return all(spec.kind == "lp" and spec.p == 2.0 for spec in (spec_e, spec_f))


def lipschitz_commutator_check(
    A: MatrixOp,
    B: MatrixOp,
    f: LipschitzFn,
    spec_e: Union[SpaceSpec, str] = "lp:2",
    spec_f: Union[SpaceSpec, str] = "lp:2",
    backend: str = "jacobi",
    rtol: float = 1e-10,
) -> LipschitzReport:
    """r = ‖[f(A), B]‖_F / (Lip(f) ‖[A, B]‖_E), plus the residual of T_{f^[1]}([A, B]) = [f(A), B].

    In the Frobenius norm the divided-difference Schur multiplier is bounded entrywise by Lip(f), so
    r <= 1 is asserted there; other pairs of norms are only recorded.
    """
    spec_e = parse_space(spec_e) if isinstance(spec_e, str) else spec_e
    spec_f = parse_space(spec_f) if isinstance(spec_f, str) else spec_f
    _require_hermitian(A)
    _require_hermitian(B, "B")

    commutator_ab = commutator(A, B)
    denominator = f.lipschitz * schatten_norm(commutator_ab, spec_e, backend)
    if denominator <= 1e-14 * max(1.0, A.frobenius() * B.frobenius()):
        raise DegenerateInputError("‖[A, B]‖ vanishes (commuting pair or zero Lipschitz bound)")

    f_of_a = matrix_function(A, f, backend)
    target = commutator(f_of_a, B)
    numerator = schatten_norm(target, spec_f, backend)
    transported = doi_schur(A, f, commutator_ab, backend)
    residual = np.linalg.norm(transported.entries - target.entries) / max(1.0, target.frobenius())

    ratio = numerator / denominator
    eigenvalues, _ = A.eigh(backend)
    return LipschitzReport(
        ratio=float(ratio),
        numerator=float(numerator),
        denominator=float(denominator),
        n=A.n,
        spec_e=str(spec_e),
        spec_f=str(spec_f),
        bound_holds=bool(ratio <= 1.0 + rtol) if _frobenius_pair(spec_e, spec_f) else None,
        doi_residual=float(residual),
        spectrum=eigenvalues.tolist(),
    )


def lipschitz_difference_check(
    X: MatrixOp,
    Y: MatrixOp,
    f: LipschitzFn,
    spec_e: Union[SpaceSpec, str] = "lp:2",
    spec_f: Union[SpaceSpec, str] = "lp:2",
    backend: str = "jacobi",
    rtol: float = 1e-10,
) -> LipschitzReport:
    """r = ‖f(X) - f(Y)‖_F / (Lip(f) ‖X - Y‖_E) for hermitian X, Y; r <= 1 is asserted in Frobenius norm."""
    spec_e = parse_space(spec_e) if isinstance(spec_e, str) else spec_e
    spec_f = parse_space(spec_f) if isinstance(spec_f, str) else spec_f
    _require_hermitian(X, "X")
    _require_hermitian(Y, "Y")
    denominator = f.lipschitz * schatten_norm(X - Y, spec_e, backend)
    if denominator == 0:
        raise DegenerateInputError("X = Y or zero Lipschitz bound")
    numerator = schatten_norm(matrix_function(X, f, backend) - matrix_function(Y, f, backend), spec_f, backend)
    ratio = numerator / denominator
    return LipschitzReport(
        ratio=float(ratio),
        numerator=float(numerator),
        denominator=float(denominator),
        n=X.n,
        spec_e=str(spec_e),
        spec_f=str(spec_f),
        bound_holds=bool(ratio <= 1.0 + rtol) if _frobenius_pair(spec_e, spec_f) else None,
    )
