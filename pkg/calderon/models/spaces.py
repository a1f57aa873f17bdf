import logging
import numpy as np
from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union
from scipy.optimize import minimize_scalar
from calderon.data.rearrangement import mu_seq, mu_step
from calderon.data.sequences import Seq
from calderon.data.step_functions import StepFunction
from calderon.utils.errors import DomainError, UnsupportedNormError

logger = logging.getLogger(__name__)

PHI_NAMES = ("log1p", "tloge", "psi", "pwl")
SPACE_KINDS = ("lp", "weak-l1", "m1inf", "marcinkiewicz", "lorentz", "l1^linf", "l1+linf")


@dataclass(frozen=True)
class PhiSpec:
    """Fundamental function of a Lorentz or Marcinkiewicz space.

    log1p  φ(t) = log(1 + t)
    tloge  φ(t) = t log(e/t) on (0, 1], extended by 1 on [1, inf)
    psi    ψ(t) = t log(e^2/t) on (0, 1], 2 log(e t) on [1, inf)
    pwl    piecewise linear with ``slopes[0]`` on (0, breakpoints[0]], ..., ``slopes[-1]`` after the last breakpoint
    """

    name: str
    breakpoints: Tuple[float, ...] = field(default=())
    slopes: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.name not in PHI_NAMES:
            raise DomainError(f"unknown fundamental function '{self.name}', expected one of {PHI_NAMES}")
        if self.name != "pwl":
            if self.breakpoints or self.slopes:
                raise DomainError(f"'{self.name}' takes no breakpoints or slopes")
            return
        breakpoints = tuple(float(b) for b in self.breakpoints)
        slopes = tuple(float(s) for s in self.slopes)
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "slopes", slopes)
        if len(slopes) != len(breakpoints) + 1:
            raise DomainError("a piecewise linear φ needs exactly one more slope than breakpoints")
        if breakpoints and (breakpoints[0] <= 0 or np.any(np.diff(breakpoints) <= 0)):
            raise DomainError("φ breakpoints must be positive and strictly increasing")
        if slopes[0] <= 0 or min(slopes) < 0:
            raise DomainError("φ must be increasing: slopes must be nonnegative with a positive first slope")
        if np.any(np.diff(slopes) > 0):
            raise DomainError("φ must be concave: slopes must be nonincreasing")

    @classmethod
    def log1p(cls):
        return cls("log1p")

    @classmethod
    def tloge(cls):
        return cls("tloge")

    @classmethod
    def psi(cls):
        return cls("psi")

    @classmethod
    def piecewise_linear(cls, breakpoints: Iterable[float], slopes: Iterable[float]):
        return cls("pwl", tuple(breakpoints), tuple(slopes))

    @property
    def slope_at_zero(self) -> float:
        """φ'(0+); infinite for the t log(1/t)-type functions."""
        if self.name == "log1p":
            return 1.0
        if self.name == "pwl":
            return self.slopes[0]
        return float("inf")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("φ is defined on [0, inf)")
        if self.name == "log1p":
            out = np.log1p(t)
        elif self.name == "tloge":
            inner = np.minimum(t, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(inner > 0, inner * (1.0 - np.log(inner)), 0.0)
        elif self.name == "psi":
            with np.errstate(divide="ignore", invalid="ignore"):
                small = np.where(t > 0, t * (2.0 - np.log(np.where(t > 0, t, 1.0))), 0.0)
                large = 2.0 * (1.0 + np.log(np.where(t >= 1, t, 1.0)))
            out = np.where(t <= 1.0, small, large)
        else:
            knots = np.concatenate(([0.0], self.breakpoints))
            slopes = np.asarray(self.slopes)
            heights = np.concatenate(([0.0], np.cumsum(slopes[:-1] * np.diff(knots))))
            idx = np.searchsorted(knots, t, side="right") - 1
            out = heights[idx] + slopes[idx] * (t - knots[idx])
        return out if out.ndim else float(out)

    def __str__(self):
        if self.name == "pwl":
            return "pwl:" + ",".join(repr(b) for b in self.breakpoints) + ":" + ",".join(repr(s) for s in self.slopes)
        return self.name


@dataclass(frozen=True)
class SpaceSpec:
    """Names a symmetric (quasi-)norm; ``discrete`` selects the sequence realization."""

    kind: str
    p: float = None
    phi: PhiSpec = None
    discrete: bool = False

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise DomainError(f"unknown space kind '{self.kind}', expected one of {SPACE_KINDS}")
        if self.kind == "lp":
            if self.p is None or not float(self.p) >= 1:
                raise DomainError(f"p must be >= 1, got {self.p}")
            object.__setattr__(self, "p", float(self.p))
        if self.kind in ("marcinkiewicz", "lorentz") and not isinstance(self.phi, PhiSpec):
            raise DomainError(f"'{self.kind}' needs a fundamental function")
        if self.kind == "m1inf":
            object.__setattr__(self, "phi", PhiSpec.log1p())

    @classmethod
    def lp(cls, p: float, discrete: bool = False):
        return cls("lp", p=p, discrete=discrete)

    @classmethod
    def weak_l1(cls, discrete: bool = False):
        return cls("weak-l1", discrete=discrete)

    @classmethod
    def m1inf(cls, discrete: bool = False):
        return cls("m1inf", discrete=discrete)

    @classmethod
    def marcinkiewicz(cls, phi: PhiSpec, discrete: bool = False):
        return cls("marcinkiewicz", phi=phi, discrete=discrete)

    @classmethod
    def lorentz(cls, phi: PhiSpec, discrete: bool = False):
        return cls("lorentz", phi=phi, discrete=discrete)

    @classmethod
    def l1_cap_linf(cls, discrete: bool = False):
        return cls("l1^linf", discrete=discrete)

    @classmethod
    def l1_plus_linf(cls, discrete: bool = False):
        return cls("l1+linf", discrete=discrete)

    def as_discrete(self):
        return SpaceSpec(self.kind, self.p, None if self.kind == "m1inf" else self.phi, True)

    def __str__(self):
        if self.kind == "lp":
            text = "lp:inf" if np.isinf(self.p) else f"lp:{self.p:g}"
        elif self.kind in ("marcinkiewicz", "lorentz"):
            text = f"{self.kind}:{self.phi}"
        else:
            text = self.kind
        return text + ("/d" if self.discrete else "")


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def parse_phi(text: str) -> PhiSpec:
    name, _, rest = text.partition(":")
    if name != "pwl":
        if rest:
            raise DomainError(f"'{name}' takes no parameters, got '{text}'")
        return PhiSpec(name)
    breakpoints, sep, slopes = rest.partition(":")
    if not sep:
        raise DomainError(f"expected pwl:<breakpoints>:<slopes>, got '{text}'")
    return PhiSpec.piecewise_linear(_parse_floats(breakpoints), _parse_floats(slopes))


def parse_space(text: str) -> SpaceSpec:
    """Parses the compact space grammar.

    Examples: ``lp:1.5``, ``lp:inf``, ``weak-l1``, ``m1inf``, ``marcinkiewicz:tloge``, ``lorentz:log1p``,
    ``lorentz:psi``, ``lorentz:pwl:1,2:3,2,1``, ``l1+linf``, ``l1^linf``; a trailing ``/d`` selects the
    sequence realization.
    """
    text = text.strip().lower()
    discrete = text.endswith("/d")
    if discrete:
        text = text[:-2]
    kind, _, rest = text.partition(":")
    try:
        if kind == "lp":
            if not rest:
                raise DomainError("lp needs an exponent, e.g. lp:2")
            return SpaceSpec.lp(float("inf") if rest in ("inf", "infinity") else float(rest), discrete)
        if kind in ("marcinkiewicz", "lorentz"):
            return SpaceSpec(kind, phi=parse_phi(rest), discrete=discrete)
        if rest:
            raise DomainError(f"'{kind}' takes no parameters")
        return SpaceSpec(kind, discrete=discrete)
    except DomainError as err:
        raise DomainError(f"invalid space '{text}': {err}") from err
    except ValueError as err:
        raise DomainError(f"invalid space '{text}': {err}") from err


# ---------------------------------------------------------------------------
# function side


def _marcinkiewicz_function(mu, phi: PhiSpec, xatol: float = 1e-10) -> float:
    """sup_t (1/φ(t)) ∫_0^t μ, as a maximum over per-piece candidates.

    Beyond the support the numerator is constant and φ increasing, so only (0, t_n] matters. Each
    piece contributes its right endpoint and a bounded scalar search of its interior; the left end of
    the first piece contributes the limit μ(0+)/φ'(0+).

    ``minimize_scalar(method="bounded")`` is Brent's method: golden-section steps on the bracket, with
    parabolic steps accepted only when they stay inside it and shrink it. Together with the explicit
    endpoint candidates this is a safeguarded golden-section search.

    Where φ is concave on a piece (every φ here except ψ across t = 1) and L is the linear numerator,
    (L/φ)' has the sign of v·φ - L·φ', which is nondecreasing; the ratio is quasi-convex there and
    its maximum sits at an endpoint. The search only returns attained values, so the result never
    exceeds the true supremum.
    """
    breakpoints, values = mu.breakpoints, mu.values
    left = mu.left_endpoints
    offsets = mu.cumulative(left)
    ratios = mu.cumulative(breakpoints) / phi(breakpoints)
    best = float(values[0] / phi.slope_at_zero)
    best = max(best, float(ratios.max()))

    for a, b, v, offset in zip(left, breakpoints, values, offsets):
        lower = a if a > 0 else b * 1e-12

        def negative_ratio(t, a=a, v=v, offset=offset):
            return -(offset + v * (t - a)) / phi(t)

        result = minimize_scalar(
            negative_ratio, bounds=(lower, b), method="bounded", options={"xatol": xatol * max(1.0, b)}
        )
        best = max(best, -float(result.fun))
    return best


def _function_norm(x: StepFunction, spec: SpaceSpec) -> float:
    mu = mu_step(x)
    if mu.is_zero():
        return 0.0
    if spec.kind == "lp":
        return mu.lp_norm(spec.p)
    if spec.kind == "weak-l1":
        # sup of t·μ(t) on a piece is attained at its right endpoint
        return float(np.max(mu.breakpoints * mu.values))
    if spec.kind in ("m1inf", "marcinkiewicz"):
        return _marcinkiewicz_function(mu, spec.phi)
    if spec.kind == "lorentz":
        increments = np.diff(np.concatenate(([0.0], spec.phi(mu.breakpoints))))
        return float(np.dot(mu.values, increments))
    if spec.kind == "l1^linf":
        return max(mu.lp_norm(1), mu.lp_norm(np.inf))
    if spec.kind == "l1+linf":
        return float(mu.cumulative(1.0))
    raise UnsupportedNormError(f"no function-side norm for '{spec}'")


# ---------------------------------------------------------------------------
# sequence side


def _sequence_norm(a: Seq, spec: SpaceSpec) -> float:
    mu = mu_seq(a).entries
    if not np.any(mu):
        return 0.0
    n = np.arange(mu.size)
    if spec.kind == "lp":
        if np.isinf(spec.p):
            return float(mu[0])
        return float(np.sum(mu**spec.p) ** (1.0 / spec.p))
    if spec.kind == "weak-l1":
        return float(np.max((n + 1) * mu))
    if spec.kind in ("m1inf", "marcinkiewicz"):
        # m1inf: Σ_{k<=n} μ(k) / log(2 + n)
        return float(np.max(np.cumsum(mu) / spec.phi(n + 1.0)))
    if spec.kind == "lorentz":
        if spec.phi.name == "tloge":
            raise UnsupportedNormError("lorentz:tloge is defined on (0, 1] only; use the function realization")
        if spec.phi.name == "log1p":
            # the sequence norm of Λ_log is Σ μ(n)/(n+1)
            return float(np.sum(mu / (n + 1.0)))
        weights = spec.phi(n + 1.0) - spec.phi(n.astype(float))
        return float(np.dot(mu, weights))
    if spec.kind == "l1^linf":
        return float(max(mu.sum(), mu[0]))
    if spec.kind == "l1+linf":
        return float(mu[0])
    raise UnsupportedNormError(f"no sequence norm for '{spec}'")


def norm(x: Union[StepFunction, Seq], spec: Union[SpaceSpec, str]) -> float:
    """Evaluates the (quasi-)norm named by ``spec`` exactly on a step function or a finite sequence."""
    if isinstance(spec, str):
        spec = parse_space(spec)
    if isinstance(x, StepFunction):
        if spec.discrete:
            raise UnsupportedNormError(f"'{spec}' is a sequence norm but a step function was given")
        return _function_norm(x, spec)
    if isinstance(x, Seq):
        if not spec.discrete:
            raise UnsupportedNormError(f"'{spec}' is a function norm but a sequence was given; append '/d'")
        return _sequence_norm(x, spec)
    raise UnsupportedNormError(f"cannot evaluate '{spec}' on {type(x).__name__}")


def sup_p_blowup(a: Seq, p_grid: Iterable[float]) -> float:
    """max over the grid of (p - 1)·‖a‖_p; a lower bound for the supremum over (1, 2]."""
    p_grid = np.asarray(list(p_grid), dtype=float)
    if p_grid.size == 0:
        raise DomainError("p grid must be nonempty")
    if np.any(p_grid <= 1) or np.any(p_grid > 2):
        raise DomainError("p grid must lie inside (1, 2]")
    mu = mu_seq(a).entries
    mu = mu[mu > 0]
    if mu.size == 0:
        return 0.0
    values = [(p - 1.0) * float(np.sum(mu**p) ** (1.0 / p)) for p in p_grid]
    return float(max(values))


def llogl_functional(x: StepFunction) -> float:
    """∫_0^1 μ(t) log₊ μ(t) dt."""
    mu = mu_step(x)
    if mu.is_zero():
        return 0.0
    lengths = np.clip(np.minimum(mu.breakpoints, 1.0) - mu.left_endpoints, 0.0, None)
    weights = mu.values * np.log(np.maximum(mu.values, 1.0))
    return float(np.dot(weights, lengths))
