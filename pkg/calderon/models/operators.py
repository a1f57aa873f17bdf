import logging
import numpy as np
from typing import Iterable, Tuple, Union
from scipy.special import xlogy
from calderon.data.rearrangement import mu_seq
from calderon.data.sequences import Seq
from calderon.data.step_functions import StepFunction
from calderon.utils.errors import DomainError, SingularityError

logger = logging.getLogger(__name__)


class CalderonProfile:
    """Piecewise function t -> a_i + b_i/t + c_i log t on (s_{i-1}, s_i], with s_0 = 0 and s_m possibly inf.

    This is the exact image of a step function under C, C' and S. ``edges`` holds the right
    endpoints s_1 < ... < s_m.
    """

    __slots__ = ("edges", "a", "b", "c")

    def __init__(self, edges: Iterable[float], a: Iterable[float], b: Iterable[float], c: Iterable[float]):
        edges = np.asarray(edges, dtype=float)
        a, b, c = (np.asarray(coef, dtype=float) for coef in (a, b, c))
        if not (edges.shape == a.shape == b.shape == c.shape) or edges.size == 0:
            raise DomainError("a profile needs one (a, b, c) triple per piece and at least one piece")
        if edges[0] <= 0 or np.any(np.diff(edges) <= 0):
            raise DomainError("profile edges must be positive and strictly increasing")
        for name, value in zip(self.__slots__, (edges, a, b, c)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("CalderonProfile is immutable")

    @classmethod
    def zero(cls):
        return cls([np.inf], [0.0], [0.0], [0.0])

    @property
    def num_pieces(self) -> int:
        return self.edges.size

    @property
    def left_edges(self) -> np.ndarray:
        return np.concatenate(([0.0], self.edges[:-1]))

    def _piece(self, t: np.ndarray) -> np.ndarray:
        # t on a breakpoint takes the piece to its right
        return np.minimum(np.searchsorted(self.edges, t, side="right"), self.edges.size - 1)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("profiles are evaluated on (0, inf)")
        idx = self._piece(t)
        out = self.a[idx] + self.b[idx] / t + self.c[idx] * np.log(t)
        beyond = t > self.edges[-1]
        out = np.where(beyond, 0.0, out)
        return out if out.ndim else float(out)

    __call__ = evaluate

    def _on_grid(self, edges: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coefficients re-expressed on a refinement of this profile's partition."""
        probes = np.concatenate(([0.0], edges[:-1]))
        idx = np.minimum(np.searchsorted(self.edges, probes, side="right"), self.edges.size - 1)
        outside = probes >= self.edges[-1]
        return tuple(np.where(outside, 0.0, coef[idx]) for coef in (self.a, self.b, self.c))

    def __add__(self, other):
        if not isinstance(other, CalderonProfile):
            return NotImplemented
        edges = np.union1d(self.edges, other.edges)
        mine, theirs = self._on_grid(edges), other._on_grid(edges)
        return CalderonProfile(edges, *(m + t for m, t in zip(mine, theirs)))

    def __mul__(self, alpha: float):
        if not np.isscalar(alpha):
            return NotImplemented
        return CalderonProfile(self.edges, alpha * self.a, alpha * self.b, alpha * self.c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    @staticmethod
    def _primitive(a, b, c, t):
        """a t + b log t + c (t log t - t); the t -> 0 limit is finite whenever b = 0."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_term = np.where(b == 0, 0.0, b * np.log(t))
        return a * t + log_term + c * (xlogy(t, t) - t)

    def integral(self, lower: float, upper: float) -> float:
        """Closed-form ∫_lower^upper of the profile, 0 <= lower <= upper < inf."""
        if not 0 <= lower <= upper < np.inf:
            raise DomainError(f"need 0 <= lower <= upper < inf, got [{lower}, {upper}]")
        total = 0.0
        for left, right, a, b, c in zip(self.left_edges, self.edges, self.a, self.b, self.c):
            lo, hi = max(left, lower), min(right, upper)
            if lo >= hi:
                continue
            if lo == 0 and b != 0:
                return float("inf")
            total += float(self._primitive(a, b, c, hi) - self._primitive(a, b, c, lo))
        return total

    def sample_points(self) -> np.ndarray:
        """Finite piece endpoints, piece interiors and interior stationary points."""
        finite = self.edges[np.isfinite(self.edges)]
        points = [finite]
        for left, right, b, c in zip(self.left_edges, self.edges, self.b, self.c):
            upper = right if np.isfinite(right) else 2.0 * max(left, 1.0)
            lower = left if left > 0 else upper * 1e-6
            points.append(np.array([lower, 0.5 * (lower + upper), upper]))
            # derivative (c t - b) / t^2 vanishes at t = b / c
            if c != 0 and lower < b / c < upper:
                points.append(np.array([b / c]))
        return np.unique(np.concatenate(points))

    def is_nonincreasing(self, rtol: float = 1e-12) -> bool:
        points = self.sample_points()
        values = self.evaluate(points)
        scale = max(1.0, float(np.max(np.abs(values))))
        return bool(np.all(np.diff(values) <= rtol * scale))

    def to_dict(self) -> dict:
        return {
            "edges": [float(e) if np.isfinite(e) else "inf" for e in self.edges],
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
        }

    def __repr__(self):
        return f"CalderonProfile(pieces={self.num_pieces}, support_end={self.edges[-1]:g})"


def cesaro(x: StepFunction) -> CalderonProfile:
    """(Cx)(t) = (1/t) ∫_0^t x."""
    if x.is_zero():
        return CalderonProfile.zero()
    left = x.left_endpoints
    offsets = x.integral_to(left)
    # on (t_{i-1}, t_i]: v_i + (A_{i-1} - v_i t_{i-1}) / t; past t_n: (∫x) / t
    edges = np.concatenate((x.breakpoints, [np.inf]))
    a = np.concatenate((x.values, [0.0]))
    b = np.concatenate((offsets - x.values * left, [x.integral()]))
    return CalderonProfile(edges, a, b, np.zeros_like(a))


def cesaro_dual(x: StepFunction) -> CalderonProfile:
    """(C'x)(t) = ∫_t^inf x(s) ds / s; vanishes past the support."""
    if x.is_zero():
        return CalderonProfile.zero()
    breakpoints, values = x.breakpoints, x.values
    log_right = np.log(breakpoints)
    log_left = np.concatenate(([0.0], log_right[:-1]))
    contributions = values * (log_right - log_left)
    contributions[0] = 0.0
    # tail[i] = Σ_{j>i} v_j log(t_j / t_{j-1})
    tail = np.concatenate((np.cumsum(contributions[::-1])[::-1][1:], [0.0]))
    edges = np.concatenate((breakpoints, [np.inf]))
    a = np.concatenate((values * log_right + tail, [0.0]))
    c = np.concatenate((-values, [0.0]))
    return CalderonProfile(edges, a, np.zeros_like(a), c)


def calderon(x: StepFunction) -> CalderonProfile:
    """(Sx)(t) = (Cx)(t) + (C'x)(t)."""
    return cesaro(x) + cesaro_dual(x)


def calderon_discrete(a: Seq, length: int = None) -> Seq:
    """(S^d a)(n) = (1/(n+1)) Σ_{k<=n} a(k) + Σ_{k>n} a(k)/k for n = 0, ..., length - 1.

    Sums are exact because the support is finite; ``length`` defaults to the end of the support.
    """
    if a.offset < 0:
        raise DomainError("the discrete Calderón operator acts on sequences indexed by n >= 0")
    support = a.last + 1
    length = support if length is None else int(length)
    if length < 1:
        raise DomainError("length must be >= 1")
    size = max(length, support)
    full = np.zeros(size, dtype=a.entries.dtype)
    full[a.offset : support] = a.entries
    k = np.arange(size)
    head = np.cumsum(full) / (k + 1.0)
    weighted = np.zeros_like(full)
    weighted[1:] = full[1:] / k[1:]
    # tail[n] = Σ_{k>n} a(k)/k
    tail = np.concatenate((np.cumsum(weighted[::-1])[::-1][1:], [0.0]))
    return Seq((head + tail)[:length], 0)


# ---------------------------------------------------------------------------
# Hilbert transforms


class IntervalStep:
    """Signed finite union of intervals of the real line: value v_i on (l_i, r_i]."""

    __slots__ = ("lefts", "rights", "values")

    def __init__(self, lefts: Iterable[float], rights: Iterable[float], values: Iterable[float]):
        lefts, rights, values = (np.asarray(arr, dtype=float).ravel() for arr in (lefts, rights, values))
        if not (lefts.shape == rights.shape == values.shape):
            raise DomainError("lefts, rights and values must have the same length")
        if np.any(rights <= lefts):
            raise DomainError("every interval must satisfy left < right")
        for name, value in zip(self.__slots__, (lefts, rights, values)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("IntervalStep is immutable")

    @classmethod
    def from_step(cls, x: StepFunction, shift: float = 0.0):
        return cls(x.left_endpoints + shift, x.breakpoints + shift, x.values)

    @property
    def endpoints(self) -> np.ndarray:
        active = self.values != 0
        return np.union1d(self.lefts[active], self.rights[active])

    def to_dict(self) -> dict:
        return {"lefts": self.lefts.tolist(), "rights": self.rights.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict):
        return cls(data["lefts"], data["rights"], data["values"])


def hilbert_step(x: Union[StepFunction, IntervalStep], t):
    """Principal value (1/π) ∫ x(s)/(t - s) ds, exactly: (1/π) Σ v_i log(|t - l_i| / |t - r_i|)."""
    if isinstance(x, StepFunction):
        x = IntervalStep.from_step(x)
    t = np.asarray(t, dtype=float)
    singular = np.isin(t, x.endpoints)
    if np.any(singular):
        raise SingularityError(f"Hilbert transform evaluated on a breakpoint: t={t[singular].ravel()[:5].tolist()}")
    if x.values.size == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    flat = t.reshape(-1, 1)
    logs = np.log(np.abs(flat - x.lefts)) - np.log(np.abs(flat - x.rights))
    out = (logs @ x.values / np.pi).reshape(t.shape)
    return out if out.ndim else float(out)


def _odd_kernel(a: Seq, window: Tuple[int, int], flip: bool) -> Seq:
    """(2/(πi)) Σ_{k ≡ n+1 (mod 2)} a(k) / (k - n), or / (n - k) when ``flip``."""
    start, stop = window
    if stop <= start:
        raise DomainError(f"empty output window [{start}, {stop})")
    n = np.arange(start, stop)
    k = a.indices
    gaps = (k[None, :] - n[:, None]).astype(float)
    if flip:
        gaps = -gaps
    odd = (np.abs(k[None, :] - n[:, None]) % 2) == 1
    kernel = np.where(odd, 1.0 / np.where(odd, gaps, 1.0), 0.0)
    return Seq((2.0 / (np.pi * 1j)) * (kernel @ a.entries), start)


def default_window(a: Seq) -> Tuple[int, int]:
    return a.offset - len(a), a.last + len(a) + 1


def hilbert_discrete(a: Seq, window: Tuple[int, int] = None) -> Seq:
    """(H_d a)(n) = (2/(πi)) Σ_{k ≡ n+1 (mod 2)} a(k)/(k - n) on ``window = (start, stop)``."""
    return _odd_kernel(a, window or default_window(a), flip=False)


def fourier_truncation_symbol(a: Seq, window: Tuple[int, int] = None) -> Seq:
    """b(n) = (2/(πi)) Σ_{k ≡ n+1 (mod 2)} a(k)/(n - k).

    This is the Fourier symbol of the truncated convolution operator. It differs from H_d a only in
    sign, so |b| = |H_d a| entrywise.
    """
    return _odd_kernel(a, window or default_window(a), flip=True)


def reflected_rearrangement(a: Seq) -> Seq:
    """c(k) = μ(-k/2, a) for even k <= 0 and 0 otherwise, on the window [-2(len - 1), 0]."""
    mu = mu_seq(a).entries
    entries = np.zeros(2 * mu.size - 1)
    entries[::2] = mu[::-1]
    return Seq(entries, -2 * (mu.size - 1))
