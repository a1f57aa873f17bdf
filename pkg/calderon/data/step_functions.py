import numpy as np
from typing import Callable, Iterable, Literal, Union
from calderon.utils.errors import DomainError

ArrayLike = Union[float, Iterable[float], np.ndarray]


class StepFunction:
    """Finitely supported piecewise-constant function on (0, inf).

    ``x(t) = values[i]`` on ``(breakpoints[i-1], breakpoints[i]]`` (with ``breakpoints[-1] := 0``)
    and ``x(t) = 0`` for ``t > breakpoints[-1]``. Instances are canonical: adjacent pieces with equal
    values are merged and trailing zero pieces are dropped, so structural equality is equality of
    functions.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints: Iterable[float], values: Iterable[float]):
        breakpoints = np.asarray(breakpoints, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if breakpoints.shape != values.shape:
            raise DomainError(
                f"breakpoints and values must have the same length, got {breakpoints.size} and {values.size}"
            )
        if not (np.all(np.isfinite(breakpoints)) and np.all(np.isfinite(values))):
            raise DomainError("breakpoints and values must be finite")
        if breakpoints.size and breakpoints[0] <= 0:
            raise DomainError("breakpoints must be positive")
        if np.any(np.diff(breakpoints) <= 0):
            raise DomainError("breakpoints must be strictly increasing")

        breakpoints, values = _canonicalize(breakpoints, values)
        breakpoints.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    # ------------------------------------------------------------------ basics

    @classmethod
    def zero(cls):
        return StepFunction([], [])

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0):
        """value on (a, b], zero elsewhere."""
        if not 0 <= a < b:
            raise DomainError(f"need 0 <= a < b, got a={a}, b={b}")
        if a == 0:
            return StepFunction([b], [value])
        return StepFunction([a, b], [0.0, value])

    @property
    def num_pieces(self) -> int:
        return self.breakpoints.size

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1]) if self.breakpoints.size else 0.0

    @property
    def left_endpoints(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breakpoints[:-1]))[: self.breakpoints.size]

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(np.concatenate(([0.0], self.breakpoints)))

    def is_zero(self) -> bool:
        return self.breakpoints.size == 0

    def __call__(self, t: ArrayLike):
        return self.evaluate(t)

    def evaluate(self, t: ArrayLike):
        """Value on the piece (t_{i-1}, t_i] containing t; 0 outside (0, t_n]."""
        t = np.asarray(t, dtype=float)
        padded = np.concatenate((self.values, [0.0]))
        idx = np.searchsorted(self.breakpoints, t, side="left")
        out = np.where(t > 0, padded[idx], 0.0)
        return out if out.ndim else float(out)

    def evaluate_right_continuous(self, t: ArrayLike):
        """Right limit x(t+); the convention under which a decreasing rearrangement is right-continuous."""
        t = np.asarray(t, dtype=float)
        padded = np.concatenate((self.values, [0.0]))
        idx = np.searchsorted(self.breakpoints, t, side="right")
        out = np.where(t >= 0, padded[idx], 0.0)
        return out if out.ndim else float(out)

    # --------------------------------------------------------------- algebra

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        grid = np.union1d(self.breakpoints, other.breakpoints)
        if grid.size == 0:
            return StepFunction.zero()
        return StepFunction(grid, self.evaluate(grid) + other.evaluate(grid))

    def __neg__(self):
        return StepFunction(self.breakpoints, -self.values)

    def __sub__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self + (-other)

    def __mul__(self, alpha: float):
        if not np.isscalar(alpha):
            return NotImplemented
        return StepFunction(self.breakpoints, float(alpha) * self.values)

    __rmul__ = __mul__

    def __abs__(self):
        return StepFunction(self.breakpoints, np.abs(self.values))

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.values.tobytes()))

    def __repr__(self):
        pieces = ", ".join(f"{v:g} on ({a:g},{b:g}]" for a, b, v in zip(self.left_endpoints, self.breakpoints, self.values))
        return f"{type(self).__name__}({pieces or '0'})"

    # ------------------------------------------------------------- integrals

    def integral(self) -> float:
        return float(np.dot(self.values, self.lengths))

    def integral_to(self, t: ArrayLike):
        """Exact ∫_0^t x(s) ds (piecewise linear in t)."""
        t = np.asarray(t, dtype=float)
        cumulative = np.concatenate(([0.0], np.cumsum(self.values * self.lengths)))
        knots = np.concatenate(([0.0], self.breakpoints))
        # np.interp is exact for a piecewise linear cumulative and flat beyond the last knot
        out = np.interp(np.clip(t, 0.0, None), knots, cumulative) if knots.size > 1 else np.zeros_like(t)
        return out if np.ndim(out) else float(out)

    def lp_norm(self, p: float) -> float:
        if p < 1:
            raise DomainError(f"p must be >= 1, got {p}")
        if self.is_zero():
            return 0.0
        magnitudes = np.abs(self.values)
        if np.isinf(p):
            return float(magnitudes.max())
        return float(np.dot(magnitudes**p, self.lengths) ** (1.0 / p))

    # ------------------------------------------------------------------ I/O

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict):
        if set(data) - {"breakpoints", "values"}:
            raise DomainError(f"unexpected keys in step function: {sorted(set(data) - {'breakpoints', 'values'})}")
        return cls(data["breakpoints"], data["values"])


class DecreasingStep(StepFunction):
    """A StepFunction with nonnegative, nonincreasing values; the shape of a decreasing rearrangement."""

    __slots__ = ()

    def __init__(self, breakpoints: Iterable[float], values: Iterable[float]):
        super().__init__(breakpoints, values)
        if np.any(self.values < 0) or np.any(np.diff(self.values) > 0):
            raise DomainError("DecreasingStep values must be nonnegative and nonincreasing")

    @classmethod
    def zero(cls):
        return DecreasingStep([], [])

    def cumulative(self, t: ArrayLike):
        """∫_0^t μ(s) ds; concave and piecewise linear."""
        return self.integral_to(t)

    def __mul__(self, alpha: float):
        if not np.isscalar(alpha):
            return NotImplemented
        if alpha >= 0:
            return DecreasingStep(self.breakpoints, float(alpha) * self.values)
        return StepFunction(self.breakpoints, float(alpha) * self.values)

    __rmul__ = __mul__


def _canonicalize(breakpoints: np.ndarray, values: np.ndarray):
    if breakpoints.size == 0:
        return breakpoints.copy(), values.copy()
    # a piece survives if the next one carries a different value
    keep = np.ones(values.size, dtype=bool)
    keep[:-1] = values[:-1] != values[1:]
    breakpoints, values = breakpoints[keep], values[keep]
    nonzero = np.flatnonzero(values != 0)
    last = nonzero[-1] + 1 if nonzero.size else 0
    return breakpoints[:last].copy(), values[:last].copy()


# ---------------------------------------------------------------------------
# builders


def step_from_function(
    fn: Callable[[np.ndarray], np.ndarray],
    breakpoints: Iterable[float],
    rule: Literal["left", "right", "mid"] = "left",
) -> StepFunction:
    """Samples ``fn`` once per piece of the partition; ``rule`` picks the sample point in each piece.

    With ``rule="left"`` the first piece (0, t_1] is sampled at t_1 / 2, as ``fn`` may blow up at 0.
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.size == 0:
        return StepFunction.zero()
    left = np.concatenate(([0.0], breakpoints[:-1]))
    if rule == "left":
        points = left.copy()
        points[0] = 0.5 * breakpoints[0]
    elif rule == "right":
        points = breakpoints
    elif rule == "mid":
        points = 0.5 * (left + breakpoints)
    else:
        raise DomainError(f"unknown sampling rule '{rule}'")
    return StepFunction(breakpoints, fn(points))


def dyadic_power_step(alpha: float, pieces: int = 32, top: float = 1.0) -> DecreasingStep:
    """Dyadic approximation of t^(-alpha) on (0, top].

    The piece (2^{-k-1} top, 2^{-k} top] carries (2^{-k-1} top)^(-alpha). The innermost piece
    (0, 2^{-(pieces-1)} top] is sampled at half its right endpoint.
    """
    if pieces < 1:
        raise DomainError("pieces must be >= 1")
    right = top * 2.0 ** -np.arange(pieces)[::-1]
    sample = right / 2.0
    return DecreasingStep(right, sample ** (-float(alpha)))


def random_step(
    rng: np.random.Generator,
    pieces: int = 8,
    signed: bool = True,
    max_length: float = 2.0,
    scale: float = 3.0,
) -> StepFunction:
    lengths = rng.uniform(0.05, max_length, size=pieces)
    values = rng.uniform(-scale if signed else 0.0, scale, size=pieces)
    return StepFunction(np.cumsum(lengths), values)


def random_decreasing_step(
    rng: np.random.Generator,
    pieces: int = 8,
    support: float = None,
    scale: float = 3.0,
) -> DecreasingStep:
    """Random DecreasingStep; with ``support`` given, the breakpoints are rescaled to end exactly there."""
    lengths = rng.exponential(1.0, size=pieces) + 1e-3
    breakpoints = np.cumsum(lengths)
    if support is not None:
        breakpoints = breakpoints * (support / breakpoints[-1])
        breakpoints[-1] = support
    values = np.sort(rng.uniform(0.0, scale, size=pieces))[::-1] + 1e-3
    return DecreasingStep(breakpoints, values)
