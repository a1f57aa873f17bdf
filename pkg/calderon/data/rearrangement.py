import logging
import numpy as np
from typing import Sequence, Union
from calderon.data.sequences import Seq
from calderon.data.step_functions import DecreasingStep, StepFunction
from calderon.utils.errors import DomainError

logger = logging.getLogger(__name__)

RTOL = 1e-12


def _within(lhs, rhs, rtol: float = RTOL):
    """lhs <= rhs up to a relative tolerance."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    return lhs <= rhs + rtol * np.maximum(np.abs(lhs), np.abs(rhs))


def mu_step(x: StepFunction) -> DecreasingStep:
    """Decreasing rearrangement of |x|.

    The (|value|, length) pairs of x are sorted by value, ties keeping their original order, and the
    lengths are cumulated into breakpoints. Inputs whose moduli are already nonincreasing keep their
    breakpoints untouched, which makes the map idempotent bit for bit.
    """
    if isinstance(x, DecreasingStep):
        return x
    magnitudes = np.abs(x.values)
    if np.all(np.diff(magnitudes) <= 0):
        return DecreasingStep(x.breakpoints, magnitudes)

    lengths = x.lengths
    keep = magnitudes > 0
    magnitudes, lengths = magnitudes[keep], lengths[keep]
    order = np.argsort(-magnitudes, kind="stable")
    return DecreasingStep(np.cumsum(lengths[order]), magnitudes[order])


def mu_seq(a: Seq) -> Seq:
    """|a| sorted in decreasing order, placed at offset 0."""
    return Seq(np.sort(np.abs(a.entries))[::-1], 0)


def mu_at(x: StepFunction, t) -> Union[float, np.ndarray]:
    """Right-continuous μ(t, x)."""
    return mu_step(x).evaluate_right_continuous(t)


def dilate(x: StepFunction, s: float) -> StepFunction:
    """σ_s x(t) = x(t / s)."""
    if not s > 0:
        raise DomainError(f"dilation parameter must be positive, got {s}")
    return type(x)(x.breakpoints * float(s), x.values)


def cumulative(x: StepFunction, t):
    """∫_0^t μ(s, x) ds."""
    return mu_step(x).cumulative(t)


def submajorizes(x: StepFunction, y: StepFunction, rtol: float = RTOL) -> bool:
    """True iff y ≺≺ x, i.e. ∫_0^t μ(y) <= ∫_0^t μ(x) for every t >= 0.

    Both cumulatives are concave and piecewise linear with kinks only at breakpoints, so comparing them
    on the union of breakpoints decides the question; past the last breakpoint both are constant.
    """
    mu_x, mu_y = mu_step(x), mu_step(y)
    grid = np.union1d(mu_x.breakpoints, mu_y.breakpoints)
    if grid.size == 0:
        return True
    return bool(np.all(_within(mu_y.cumulative(grid), mu_x.cumulative(grid), rtol)))


def triangle_mu(x: StepFunction, y: StepFunction, t: float, s: float, rtol: float = RTOL) -> bool:
    """Checks μ(t + s, x + y) <= μ(t, x) + μ(s, y)."""
    if not (t > 0 and s > 0):
        raise DomainError(f"t and s must be positive, got t={t}, s={s}")
    lhs = mu_at(x + y, t + s)
    rhs = mu_at(x, t) + mu_at(y, s)
    ok = bool(_within(lhs, rhs, rtol))
    if not ok:
        logger.debug(f"triangle_mu violated: mu(t+s, x+y)={lhs!r} > {rhs!r} at t={t}, s={s}")
    return ok


def dilation_sum_bound(xs: Sequence[StepFunction], rtol: float = RTOL) -> bool:
    """Checks μ(x_1 + ... + x_N) <= Σ_n σ_{2^n} μ(x_n) pointwise, n starting at 1.

    Both sides are step functions, so comparing their values on every piece of the common partition
    is exact.
    """
    if not xs:
        return True
    total = StepFunction.zero()
    majorant = StepFunction.zero()
    for n, x in enumerate(xs, start=1):
        total = total + x
        majorant = majorant + dilate(mu_step(x), 2.0**n)
    lhs = mu_step(total)
    grid = np.union1d(lhs.breakpoints, majorant.breakpoints)
    if grid.size == 0:
        return True
    return bool(np.all(_within(lhs.evaluate(grid), majorant.evaluate(grid), rtol)))


def partial_sums(a: Seq) -> np.ndarray:
    """Σ_{k<=n} μ(k, a) for n = 0, ..., len(a) - 1."""
    return np.cumsum(mu_seq(a).entries)


def submajorization_constant(small: np.ndarray, big: np.ndarray) -> float:
    """Least c with Σ_{k<=n} μ(k, small) <= c Σ_{k<=n} μ(k, big) for all n (inf if big vanishes first).

    Both inputs are nonnegative vectors indexed from 0; the shorter one is padded with zeros.
    """
    small = np.sort(np.abs(np.asarray(small, dtype=float)))[::-1]
    big = np.sort(np.abs(np.asarray(big, dtype=float)))[::-1]
    size = max(small.size, big.size)
    small = np.pad(small, (0, size - small.size))
    big = np.pad(big, (0, size - big.size))
    lhs, rhs = np.cumsum(small), np.cumsum(big)
    positive = lhs > 0
    if not positive.any():
        return 0.0
    if np.any(rhs[positive] == 0):
        return float("inf")
    return float(np.max(lhs[positive] / rhs[positive]))
