import logging
import numpy as np
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union
from calderon.data.rearrangement import dilate, mu_seq, mu_step
from calderon.data.sequences import Seq
from calderon.data.step_functions import DecreasingStep, StepFunction
from calderon.models.operators import calderon
from calderon.models.spaces import SpaceSpec, norm, parse_space
from calderon.utils.errors import DomainError, UnsupportedNormError
from calderon.utils.simplex import linprog

logger = logging.getLogger(__name__)

FEASIBILITY_RTOL = 1e-12
DECAY_RTOL = 1e-9
SLOPE_THRESHOLD = 0.05
MEMBERSHIP_KINDS = ("L1", "l1", "l1inf")


@dataclass
class MajorizationCertificate:
    """Outcome of checking μ(x) <= factor * Sμ(y) at the right endpoints of μ(x)'s pieces.

    μ(x) is constant on each piece and Sμ(y) is continuous and decreasing, so the slack on a piece is
    smallest at its right endpoint; the check is exact.
    """

    x: DecreasingStep
    y: StepFunction
    probes: np.ndarray
    slack: float
    scale: float
    factor: float = 1.0
    branch: str = "(0,inf)"

    @property
    def feasible(self) -> bool:
        return bool(self.slack >= -FEASIBILITY_RTOL * self.scale)

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "factor": self.factor,
            "feasible": self.feasible,
            "slack": self.slack,
            "scale": self.scale,
            "probes": len(self.probes),
        }


def feasible(
    x: StepFunction,
    y: StepFunction,
    factor: float = 1.0,
    window: Tuple[float, float] = (0.0, np.inf),
    branch: str = "(0,inf)",
) -> MajorizationCertificate:
    """Certificate for μ(x)(t) <= factor * Sμ(y)(t) over the probes of μ(x) falling in ``window``."""
    mu_x = mu_step(x)
    probes = mu_x.breakpoints[(mu_x.breakpoints > window[0]) & (mu_x.breakpoints <= window[1])]
    if probes.size == 0:
        return MajorizationCertificate(mu_x, y, probes, 0.0, 1.0, factor, branch)
    profile = calderon(mu_step(y))
    gaps = factor * profile.evaluate(probes) - mu_x.evaluate(probes)
    scale = float(mu_x.values.max())
    return MajorizationCertificate(mu_x, y, probes, float(gaps.min()), scale, factor, branch)


# ---------------------------------------------------------------------------
# LP upper bound for the F-norm


def refine_grid(breakpoints: Iterable[float], depth: int, extra_breakpoints: Iterable[float] = ()) -> np.ndarray:
    """Splits every piece (t_{i-1}, t_i] into 2^depth equal parts and merges in ``extra_breakpoints``.

    Grids of increasing depth are nested, so the LP bound can only improve as depth grows.
    """
    if depth < 0:
        raise DomainError(f"grid depth must be >= 0, got {depth}")
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.size == 0:
        return np.asarray(sorted(float(e) for e in extra_breakpoints if e > 0))
    left = np.concatenate(([0.0], breakpoints[:-1]))
    fractions = np.arange(1, 2**depth + 1) / 2.0**depth
    grid = (left[:, None] + (breakpoints - left)[:, None] * fractions[None, :]).ravel()
    extra = np.asarray([float(e) for e in extra_breakpoints], dtype=float)
    return np.union1d(grid, extra[extra > 0])


def build_fnorm_constraints(mu_x: DecreasingStep, grid: np.ndarray):
    """LP data (c, A_ub, b_ub) for min ‖y‖_1 over decreasing y constant on the grid pieces.

    Variables are the values w_i of y on (g_{i-1}, g_i]. Rows encode, in <= form,
        (1/g_j) Σ_{i<=j} w_i Δ_i + Σ_{i>j} w_i log(g_i / g_{i-1}) >= μ(x)(g_j)   for every grid point,
        w_{i+1} - w_i <= 0.
    """
    grid = np.asarray(grid, dtype=float)
    size = grid.size
    lengths = np.diff(np.concatenate(([0.0], grid)))
    logs = np.zeros(size)
    logs[1:] = np.log(grid[1:] / grid[:-1])

    lower = np.tril(np.ones((size, size)))
    S = lower * lengths[None, :] / grid[:, None] + np.triu(np.ones((size, size)), k=1) * logs[None, :]
    targets = mu_x.evaluate(grid)
    active = targets > 0

    monotone = np.zeros((max(size - 1, 0), size))
    rows = np.arange(size - 1)
    monotone[rows, rows] = -1.0
    monotone[rows, rows + 1] = 1.0

    A_ub = np.vstack((-S[active], monotone))
    b_ub = np.concatenate((-targets[active], np.zeros(size - 1)))
    return lengths, A_ub, b_ub


@dataclass
class FnormResult:
    value: float
    witness: DecreasingStep
    certificate: MajorizationCertificate
    grid: np.ndarray
    solver: str

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.to_dict(),
            "certificate": self.certificate.to_dict(),
            "grid_points": int(self.grid.size),
            "solver": self.solver,
        }


def fnorm_upper(
    x: StepFunction,
    space: Union[SpaceSpec, str] = "lp:1",
    depth: int = 2,
    extra_breakpoints: Iterable[float] = (),
    solver: str = "bland",
) -> FnormResult:
    """Certified upper bound for ‖x‖_F = inf{‖y‖_E : μ(x) <= Sμ(y)} with E = L1.

    The infimum is taken over decreasing y that are constant on a dyadic refinement of μ(x)'s
    breakpoints; the optimum is attained by a witness that passes ``feasible``.
    """
    spec = parse_space(space) if isinstance(space, str) else space
    if not (spec.kind == "lp" and spec.p == 1.0 and not spec.discrete):
        raise UnsupportedNormError(f"fnorm_upper supports E = lp:1 only, got '{spec}'")
    mu_x = mu_step(x)
    if mu_x.is_zero():
        zero = DecreasingStep.zero()
        return FnormResult(0.0, zero, feasible(x, zero), np.zeros(0), solver)

    # the LP is solved for μ(x) / μ(0+) and rescaled, which keeps it homogeneous
    top = float(mu_x.values[0])
    grid = refine_grid(mu_x.breakpoints, depth, extra_breakpoints)
    c, A_ub, b_ub = build_fnorm_constraints(mu_x * (1.0 / top), grid)
    result = linprog(c, A_ub=A_ub, b_ub=b_ub, solver=solver)
    weights = np.minimum.accumulate(np.clip(result.x, 0.0, None)) * top
    witness = DecreasingStep(grid, weights)
    # solver round-off can leave the optimum marginally infeasible; S is linear, so rescaling repairs it
    probes = mu_x.breakpoints
    deficit = float(np.max(mu_x.evaluate(probes) / calderon(witness).evaluate(probes)))
    if deficit > 1.0:
        witness = witness * deficit
    value = witness.lp_norm(1)
    logger.debug(f"fnorm LP: {grid.size} variables, {A_ub.shape[0]} rows, {result.nit} pivots, value {value:.6g}")
    return FnormResult(value, witness, feasible(x, witness), grid, solver)


# ---------------------------------------------------------------------------
# explicit construction for (L_{1,inf})^0


def resolved_levels(mu: DecreasingStep, depth: int) -> np.ndarray:
    """Dyadic points 2^-k, k = 0..depth, lying between the first breakpoint and the end of the support."""
    levels = 2.0 ** -np.arange(depth + 1)
    return levels[(levels >= mu.breakpoints[0]) & (levels <= mu.support_end)]


def vanishing_slope(mu: DecreasingStep, depth: int = 20) -> Optional[float]:
    """Log-log slope of t·μ(t) over the resolved dyadic levels; None when fewer than two are resolved."""
    levels = resolved_levels(mu, depth)
    weighted = levels * mu.evaluate(levels)
    positive = weighted > 0
    if positive.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(levels[positive]), np.log(weighted[positive]), 1)
    return float(slope)


def decays_at_zero(mu: DecreasingStep, depth: int = 20) -> Optional[bool]:
    """Whether t·μ(t) strictly decreases across the inner half of the resolved dyadic levels.

    A profile t^-α gives the ratio 2^(α-1) < 1 between consecutive levels for every α < 1, and exactly 1
    for α = 1. None when fewer than two levels are resolved.
    """
    levels = resolved_levels(mu, depth)
    if levels.size < 2:
        return None
    weighted = levels * mu.evaluate(levels)
    inner = weighted[-max(2, levels.size // 2) :]
    return bool(np.all(inner[1:] <= inner[:-1] * (1.0 - DECAY_RTOL)))


@dataclass
class KolmogorovResult:
    y: StepFunction
    y_normalized: StepFunction
    scale: float
    dilation: float
    depth: int
    l1_norm: float
    certificates: Dict[str, MajorizationCertificate] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(cert.feasible for cert in self.certificates.values())

    def to_dict(self) -> dict:
        return {
            "y": self.y.to_dict(),
            "scale": self.scale,
            "dilation": self.dilation,
            "depth": self.depth,
            "l1_norm": self.l1_norm,
            "feasible": self.feasible,
            "certificates": {name: cert.to_dict() for name, cert in self.certificates.items()},
        }


def kolmogorov_construct(x: StepFunction, depth: int = 20) -> KolmogorovResult:
    """Builds y in L1 with μ(x) <= Sμ(y) for x whose t·μ(t) vanishes at 0+.

    x is dilated so μ(x) lives in (0, 1] and scaled so sup t·μ(t) = 1. With f(t) = sup_{s<t} s μ(s) and
    h(2^n) = f(2^{n+1}), y is the slope of h on each dyadic piece (2^n, 2^{n+1}], n = -D..-1, and
    equals 2 μ(0+) on (0, 2^-D]. Then ∫_0^t y >= t μ(t) everywhere, hence μ(x) <= Cμ(y) <= Sμ(y) on
    (0, 1]; the branch [1, inf) is certified with the factor 1/h(1). The returned y is mapped back to
    the original x, so ``feasible(x, result.y)`` holds.
    """
    mu = mu_step(x)
    if mu.is_zero():
        zero = StepFunction.zero()
        return KolmogorovResult(zero, zero, 0.0, 1.0, depth, 0.0, {"(0,1]": feasible(x, zero)})

    dilation = min(1.0, 1.0 / mu.support_end)
    dilated = dilate(mu, dilation)
    scale = norm(dilated, SpaceSpec.weak_l1())
    normalized = dilated * (1.0 / scale)

    depth = max(int(depth), int(np.ceil(np.log2(4.0 / normalized.breakpoints[0]))))
    if decays_at_zero(normalized, depth) is False:
        slope = vanishing_slope(normalized, depth)
        raise DomainError(
            f"t·μ(t) does not decrease towards 0+ across the inner dyadic levels (log-log slope {slope:.3g}); "
            "x is not in (L_1,inf)^0"
        )

    # f(t) = sup_{s<t} s μ(s): the supremum over each piece is approached at its right endpoint
    right_products = normalized.breakpoints * normalized.values

    def f(t):
        t = np.asarray(t, dtype=float)
        inside = np.where(normalized.breakpoints[None, :] < t[:, None], right_products[None, :], 0.0).max(axis=1)
        # partial piece containing t contributes t·μ(t-)
        return np.maximum(inside, t * normalized.evaluate(t))

    exponents = np.arange(-depth, 1)
    knots = 2.0**exponents
    h = f(2.0 * knots)
    top = float(normalized.values[0])
    slopes = np.diff(h) / np.diff(knots)
    y_normalized = StepFunction(knots, np.concatenate(([2.0 * top], slopes)))
    h_one = float(h[-1])

    # undo the normalization: y = scale * σ_{1/dilation} y_normalized
    y = dilate(y_normalized, 1.0 / dilation) * scale
    certificates = {
        "(0,1]": feasible(normalized, y_normalized, window=(0.0, 1.0), branch="(0,1]"),
        "[1,inf)": feasible(
            normalized, y_normalized, factor=1.0 / h_one, window=(1.0, np.inf), branch="[1,inf)"
        ),
        "original": feasible(x, y, branch="original"),
    }
    l1_norm = y.lp_norm(1)
    logger.debug(f"construction: depth {depth}, scale {scale:.6g}, dilation {dilation:.6g}, ‖y‖_1 = {l1_norm:.6g}")
    return KolmogorovResult(y, y_normalized, float(scale), float(dilation), depth, float(l1_norm), certificates)


# ---------------------------------------------------------------------------
# closed-form optimal ranges


@dataclass
class MembershipResult:
    kind: str
    member: bool
    constant: float
    slope: Optional[float]
    witness: Optional[Union[Seq, StepFunction]] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "member": self.member,
            "constant": self.constant,
            "slope": self.slope,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def _tail_slope(n: np.ndarray, values: np.ndarray) -> Optional[float]:
    """Log-log slope of ``values`` against n + 1 over the second half of the support."""
    tail = n >= n.size // 2
    if tail.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(n[tail] + 1.0), np.log(values[tail]), 1)
    return float(slope)


def optimal_range_membership(kind: str, x: Union[StepFunction, Seq], depth: int = 20) -> MembershipResult:
    """Decides membership in the optimal range for E = L1 (function), ℓ1 or ℓ_{1,inf} (sequences).

    L1     range (L_{1,inf})^0: t·μ(t) must decay at 0+; witness is the constructed y.
    l1     range ℓ_{1,inf}: (n+1)·μ(n) must stay bounded; witness is sup((n+1)μ(n)) / (n+1).
    l1inf  μ(n) <= c log(n+2)/(n+1); ``constant`` is the least such c over the support.
    Boundedness of a finite sequence is judged by its trend: a log-log slope above 0.05 in the tail
    counts as growth.
    """
    if kind not in MEMBERSHIP_KINDS:
        raise DomainError(f"unknown optimal-range kind '{kind}', expected one of {MEMBERSHIP_KINDS}")

    if kind == "L1":
        if not isinstance(x, StepFunction):
            raise DomainError("kind 'L1' takes a step function")
        mu = mu_step(x)
        if mu.is_zero():
            return MembershipResult(kind, True, 0.0, None, StepFunction.zero())
        constant = norm(mu, SpaceSpec.weak_l1())
        try:
            construction = kolmogorov_construct(mu, depth)
        except DomainError:
            slope = vanishing_slope(dilate(mu, min(1.0, 1.0 / mu.support_end)), depth)
            return MembershipResult(kind, False, constant, slope)
        normalized = dilate(mu, construction.dilation) * (1.0 / construction.scale)
        return MembershipResult(kind, True, constant, vanishing_slope(normalized, construction.depth), construction.y)

    if not isinstance(x, Seq):
        raise DomainError(f"kind '{kind}' takes a sequence")
    mu = mu_seq(x).entries
    mu = mu[mu > 0]
    if mu.size == 0:
        return MembershipResult(kind, True, 0.0, None, Seq([0.0]))
    n = np.arange(mu.size)

    if kind == "l1":
        weighted = (n + 1.0) * mu
        constant = float(weighted.max())
        slope = _tail_slope(n, weighted)
        member = slope is None or slope <= SLOPE_THRESHOLD
        witness = Seq(constant / (n + 1.0)) if member else None
        return MembershipResult(kind, member, constant, slope, witness)

    ratios = mu * (n + 1.0) / np.log(n + 2.0)
    constant = float(ratios.max())
    slope = _tail_slope(n, ratios)
    member = slope is None or slope <= SLOPE_THRESHOLD
    witness = Seq(constant * np.log(n + 2.0) / (n + 1.0)) if member else None
    return MembershipResult(kind, member, constant, slope, witness)
