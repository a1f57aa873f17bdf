"""Seeded experiment suites; each turns one inequality into a pass/fail or recorded-constant report."""

import logging
import time
import numpy as np
import pandas as pd
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence
from joblib import Parallel, delayed
from scipy.special import digamma
from tqdm import tqdm
from calderon.data import sequences
from calderon.data.rearrangement import mu_seq, mu_step, submajorization_constant
from calderon.data.sequences import Seq
from calderon.data.step_functions import DecreasingStep, dyadic_power_step, random_decreasing_step
from calderon.models.matrix import (
    MatrixOp,
    block_pinching_removal,
    lipschitz_commutator_check,
    lipschitz_difference_check,
    parse_lipschitz,
    schatten_norm,
    triangular_truncate,
)
from calderon.models.operators import (
    calderon,
    calderon_discrete,
    hilbert_discrete,
    hilbert_step,
    reflected_rearrangement,
)
from calderon.models.optimal_range import fnorm_upper, kolmogorov_construct, optimal_range_membership
from calderon.models.spaces import SpaceSpec, llogl_functional, norm, sup_p_blowup
from calderon.utils.data import num_workers, trial_rng, tqdm_joblib
from calderon.utils.errors import DegenerateInputError, DomainError
from calderon.utils.evaluation import (
    ExperimentReport,
    exact_verdict,
    per_size_max,
    probe_grid,
    regression_verdict,
)
from calderon.utils.linalg import ginibre, gue

logger = logging.getLogger(__name__)

EXACT_RTOL = 1e-12
MATRIX_RTOL = 1e-10
LOWER_BOUND_SLACK = 1e-10
REARRANGED_CONSTANT = 8.0 * np.pi
MAX_MATRIX_SIZE = 256
LOWER_BOUND_CASES = ("delta", "geometric", "harmonic", "flat", "zero")
WEAK_L1 = SpaceSpec.weak_l1(discrete=True)


def _run_trials(trial_fn: Callable, jobs: List[dict], n_jobs: int = 1, progress: bool = False, desc: str = None):
    """Evaluates ``trial_fn(**job)`` for every job, in order; results do not depend on ``n_jobs``."""
    n_jobs = num_workers(n_jobs)
    if n_jobs == 1:
        return [trial_fn(**job) for job in tqdm(jobs, desc=desc, disable=not progress)]
    with tqdm_joblib(tqdm(desc=desc, total=len(jobs), disable=not progress)):
        return Parallel(n_jobs=n_jobs)(delayed(trial_fn)(**job) for job in jobs)


def _flatten(results) -> tuple:
    """Splits trial outputs into rows and a count of skipped (None) trials."""
    rows, skipped = [], 0
    for result in results:
        if result is None:
            skipped += 1
        elif isinstance(result, list):
            rows.extend(result)
        else:
            rows.append(result)
    return rows, skipped


def _check_sizes(sizes: Sequence[int]) -> List[int]:
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise DomainError("at least one matrix size is required")
    if any(n < 2 or n > MAX_MATRIX_SIZE for n in sizes):
        raise DomainError(f"matrix sizes must lie in [2, {MAX_MATRIX_SIZE}], got {sizes}")
    return sizes


def _column_max(frame: pd.DataFrame, column: str) -> float:
    if frame.empty or column not in frame:
        return 0.0
    return float(frame[column].max())


def _finish(report: ExperimentReport, start: float) -> ExperimentReport:
    report.stamp(time.perf_counter() - start)
    logger.info(
        f"{report.theorem_id}: {report.verdict} (max ratio {report.max_ratio:.6g}, "
        f"{report.trials} trials, {report.skipped} skipped, {report.metadata['runtime_seconds']:.2f}s)"
    )
    return report


# ---------------------------------------------------------------------------
# weak type (1,1) of triangular truncation


def _weak_type_trial(seed: int, size: int, trial: int, backend: str):
    rng = trial_rng(seed, trial, size)
    V = MatrixOp(ginibre(rng, size))
    l1 = schatten_norm(V, "lp:1", backend)
    if l1 == 0:
        return None
    block = int(rng.choice([1, 2, 4]))
    return {
        "size": size,
        "trial": trial,
        "ratio": schatten_norm(triangular_truncate(V), WEAK_L1, backend) / l1,
        "block": block,
        "pinching_ratio": schatten_norm(block_pinching_removal(V, block), "lp:1", backend) / l1,
    }


def verify_weak_type_T(
    sizes: Sequence[int] = (8, 16, 32, 64),
    trials: int = 100,
    seed: int = 0,
    bound: float = 10.0,
    pinching_bound: float = 2.0,
    backend: str = "jacobi",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """max ‖T(V)‖_{ℓ1,∞} / ‖V‖_{S1} over Ginibre V must stay below ``bound``."""
    start = time.perf_counter()
    sizes = _check_sizes(sizes)
    jobs = [dict(seed=seed, size=n, trial=i, backend=backend) for n in sizes for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_weak_type_trial, jobs, n_jobs, progress, "weak-type-truncation"))
    frame = pd.DataFrame(rows)

    failures = [
        {"size": row["size"], "trial": row["trial"], "ratio": row["ratio"], "pinching_ratio": row["pinching_ratio"]}
        for row in rows
        if row["ratio"] > bound or row["pinching_ratio"] > pinching_bound * (1 + MATRIX_RTOL)
    ]
    report = ExperimentReport(
        theorem_id="weak-type-truncation",
        rule=f"‖T(V)‖_weak-l1 / ‖V‖_S1 <= {bound:g} and ‖V - pinch(V)‖_S1 / ‖V‖_S1 <= {pinching_bound:g}",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=sizes,
        seed=seed,
        max_ratio=_column_max(frame, "ratio"),
        per_size=per_size_max(frame),
        recorded={"max_pinching_ratio": _column_max(frame, "pinching_ratio"), "backend": backend},
        skipped=skipped,
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# μ(T(V)) against S^d μ(V)


def _mu_domination_trial(seed: int, size: int, trial: int, backend: str):
    rng = trial_rng(seed, trial, size)
    V = MatrixOp(ginibre(rng, size))
    sigma = V.singular_values(backend)
    if sigma[0] == 0:
        return None
    tau = triangular_truncate(V).singular_values(backend)
    majorant = calderon_discrete(Seq(sigma, 0), length=size).entries.real
    return {
        "size": size,
        "trial": trial,
        "ratio": float(np.max(tau / majorant)),
        "submajorization": submajorization_constant(tau, majorant),
    }


def verify_mu_domination(
    sizes: Sequence[int] = (16, 32, 64, 128),
    trials: int = 20,
    seed: int = 0,
    factor: float = 2.0,
    backend: str = "jacobi",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """c(V) = max_k μ(k, T(V)) / (S^d μ(V))(k); the suite max may not exceed ``factor`` times the smallest-size max."""
    start = time.perf_counter()
    sizes = _check_sizes(sizes)
    jobs = [dict(seed=seed, size=n, trial=i, backend=backend) for n in sizes for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_mu_domination_trial, jobs, n_jobs, progress, "mu-domination"))
    frame = pd.DataFrame(rows)

    suite_max = _column_max(frame, "ratio")
    smallest = min(sizes)
    baseline = float(frame.loc[frame["size"] == smallest, "ratio"].max()) if not frame.empty else 0.0
    verdict = regression_verdict(suite_max, baseline, factor) if not frame.empty else "recorded"
    failures = [] if verdict != "fail" else [{"suite_max": suite_max, "baseline": baseline, "factor": factor}]
    report = ExperimentReport(
        theorem_id="mu-domination",
        rule=f"max c(V) over the suite <= {factor:g} x max c(V) at n = {smallest}",
        verdict=verdict,
        trials=trials,
        sizes=sizes,
        seed=seed,
        max_ratio=suite_max,
        per_size=per_size_max(frame),
        recorded={
            "baseline": baseline,
            "max_submajorization": _column_max(frame, "submajorization"),
            "submajorization_per_size": per_size_max(frame, "submajorization"),
            "backend": backend,
        },
        skipped=skipped,
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# lower bound through the discrete Hilbert transform


def lower_bound_case(name: str, length: int = 64) -> Seq:
    if name == "delta":
        return sequences.delta(0)
    if name == "geometric":
        return sequences.geometric(length, 0.5)
    if name == "harmonic":
        return sequences.harmonic(length)
    if name == "flat":
        return sequences.flat(length)
    if name == "zero":
        return Seq([0.0])
    raise DomainError(f"unknown lower-bound case '{name}', expected one of {LOWER_BOUND_CASES}")


def lower_bound_check(a: Seq, check_to: int = 64) -> dict:
    """Pointwise |H_d c| >= (1/2π) S^d μ(a) on n = 1..check_to and the rearranged form with 8π.

    c is the reflected rearrangement, supported on even k <= 0, so H_d c lives on odd n; an even n is
    checked through its odd neighbour n - 1, where the kernel is larger.
    """
    mu = mu_seq(a).entries
    if not np.any(mu):
        return {"ratio": 0.0, "rearranged_constant": 0.0, "pointwise_failures": [], "rearranged_failures": []}
    length = mu.size
    width = max(2 * length, check_to) + 2
    transform = np.abs(hilbert_discrete(reflected_rearrangement(a), window=(-width, width + 1)).entries)
    majorant = calderon_discrete(Seq(mu, 0), length=width + 1).entries.real

    n = np.arange(1, check_to + 1)
    odd = np.where(n % 2 == 1, n, n - 1)
    lhs = transform[odd + width]
    rhs = majorant[n] / (2.0 * np.pi)
    pointwise_failures = [
        {"n": int(k), "lhs": float(l), "rhs": float(r)} for k, l, r in zip(n, lhs, rhs) if l < r - LOWER_BOUND_SLACK
    ]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = float(np.max(np.where(lhs > 0, rhs / lhs, np.where(rhs > 0, np.inf, 0.0))))

    rearranged = np.sort(transform)[::-1][:length]
    target = majorant[:length]
    rearranged_failures = [
        {"m": int(m), "sd": float(s), "mu_h": float(h)}
        for m, (s, h) in enumerate(zip(target, rearranged))
        if s > REARRANGED_CONSTANT * h * (1 + EXACT_RTOL)
    ]
    with np.errstate(divide="ignore"):
        constant = float(np.max(np.where(rearranged > 0, target / rearranged, np.inf)))
    return {
        "ratio": ratio,
        "rearranged_constant": constant,
        "pointwise_failures": pointwise_failures,
        "rearranged_failures": rearranged_failures,
    }


def verify_lower_bound_T(
    cases: Iterable[str] = LOWER_BOUND_CASES,
    length: int = 64,
    check_to: int = 64,
) -> ExperimentReport:
    start = time.perf_counter()
    rows, failures = [], []
    for name in cases:
        a = lower_bound_case(name, length)
        check = lower_bound_check(a, check_to)
        rows.append(
            {
                "case": name,
                "size": len(a),
                "trial": 0,
                "ratio": check["ratio"],
                "rearranged_constant": check["rearranged_constant"],
            }
        )
        failures += [{"case": name, **failure} for failure in check["pointwise_failures"]]
        failures += [{"case": name, **failure} for failure in check["rearranged_failures"]]
    frame = pd.DataFrame(rows)
    report = ExperimentReport(
        theorem_id="truncation-lower-bound",
        rule=(
            f"|H_d c(n)| >= S^d μ(a)(n) / 2π - {LOWER_BOUND_SLACK:g} for n = 1..{check_to} (even n via n - 1) "
            f"and S^d μ(a) <= 8π μ(|H_d c|)"
        ),
        verdict=exact_verdict(failures),
        trials=len(rows),
        sizes=[length],
        seed=0,
        max_ratio=_column_max(frame, "ratio"),
        per_size={row["case"]: row["ratio"] for row in rows},
        recorded={
            "rearranged_constant": {row["case"]: row["rearranged_constant"] for row in rows},
            "check_to": check_to,
            "parity": "H_d c vanishes at even n; even n are checked at n - 1",
        },
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# closed-form inequalities for S and H on decreasing steps


def _random_profile_input(rng: np.random.Generator) -> DecreasingStep:
    pieces = int(rng.integers(1, 16))
    return random_decreasing_step(rng, pieces=pieces, scale=float(np.exp(rng.uniform(-3.0, 3.0))))


def _doubling_trial(seed: int, trial: int, grid: np.ndarray):
    x = _random_profile_input(trial_rng(seed, trial))
    profile = calderon(x)
    lhs = profile.evaluate(grid)
    doubled = profile.evaluate(2.0 * grid)
    bad = lhs > 4.0 * doubled * (1 + EXACT_RTOL)
    return {
        "size": x.num_pieces,
        "trial": trial,
        "ratio": float(np.max(lhs / doubled)),
        "violations": int(bad.sum()),
        "first_violation": float(grid[bad][0]) if bad.any() else None,
    }


def verify_s_by_s(
    trials: int = 1000,
    seed: int = 0,
    lo_exp: int = -4,
    hi_exp: int = 4,
    per_decade: int = 64,
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """(Sμ)(t) <= 4 (Sμ)(2t) at every probe point, relative tolerance 1e-12."""
    start = time.perf_counter()
    grid = probe_grid(lo_exp, hi_exp, per_decade)
    jobs = [dict(seed=seed, trial=i, grid=grid) for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_doubling_trial, jobs, n_jobs, progress, "calderon-doubling"))
    frame = pd.DataFrame(rows)
    failures = [row for row in rows if row["violations"]]
    report = ExperimentReport(
        theorem_id="calderon-doubling",
        rule="Sμ(t) <= 4 Sμ(2t) at every probe point (rtol 1e-12); ratio = max Sμ(t)/Sμ(2t)",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=[int(grid.size)],
        seed=seed,
        max_ratio=_column_max(frame, "ratio"),
        recorded={"probe_points": int(grid.size), "decades": [lo_exp, hi_exp], "per_decade": per_decade},
        skipped=skipped,
        failures=failures,
        per_trial=frame.drop(columns=["first_violation"], errors="ignore"),
    )
    return _finish(report, start)


def _sandwich_trial(seed: int, trial: int, grid: np.ndarray):
    x = _random_profile_input(trial_rng(seed, trial))
    lower = calderon(x).evaluate(grid) / (2.0 * np.pi)
    upper = np.abs(hilbert_step(x, -grid))
    bad = lower > upper * (1 + EXACT_RTOL)
    return {
        "size": x.num_pieces,
        "trial": trial,
        "ratio": float(np.max(lower / upper)),
        "violations": int(bad.sum()),
    }


def verify_hilbert_sandwich(
    trials: int = 100,
    seed: int = 0,
    lo_exp: int = -2,
    hi_exp: int = 2,
    per_decade: int = 16,
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """(1/2π)(Sx)(t) <= |(Hx)(-t)| for decreasing positive steps; -t never meets a breakpoint."""
    start = time.perf_counter()
    grid = probe_grid(lo_exp, hi_exp, per_decade)
    jobs = [dict(seed=seed, trial=i, grid=grid) for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_sandwich_trial, jobs, n_jobs, progress, "hilbert-sandwich"))
    frame = pd.DataFrame(rows)
    failures = [row for row in rows if row["violations"]]
    report = ExperimentReport(
        theorem_id="hilbert-sandwich",
        rule="Sx(t) / 2π <= |Hx(-t)| at every probe point (rtol 1e-12)",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=[int(grid.size)],
        seed=seed,
        max_ratio=_column_max(frame, "ratio"),
        recorded={"probe_points": int(grid.size)},
        skipped=skipped,
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# Zygmund L log L


def zygmund_function_ratio(mu: DecreasingStep) -> tuple:
    """(‖Sμ‖_{L1(0,1)}, ‖μ‖_{Λ_{t log(e/t)}} + ‖μ‖_{L1}) for μ supported in (0, 1]."""
    mu = mu_step(mu)
    if mu.is_zero():
        return 0.0, 0.0
    if mu.support_end > 1.0:
        raise DomainError(f"μ must be supported in (0, 1], support ends at {mu.support_end:g}")
    lhs = calderon(mu).integral(0.0, 1.0)
    rhs = norm(mu, "lorentz:tloge") + norm(mu, "lp:1")
    return lhs, rhs


def _zygmund_function_trial(seed: int, trial: int):
    rng = trial_rng(seed, trial, 0)
    mu = random_decreasing_step(
        rng,
        pieces=int(rng.integers(1, 16)),
        support=float(rng.uniform(0.05, 1.0)),
        scale=float(np.exp(rng.uniform(-2.0, 4.0))),
    )
    lhs, rhs = zygmund_function_ratio(mu)
    return {"part": "function", "size": mu.num_pieces, "trial": trial, "ratio": lhs / rhs, "lhs": lhs, "rhs": rhs}


def normalized_trace_step(A: MatrixOp, backend: str = "jacobi") -> DecreasingStep:
    """μ(A) on (0, 1] with respect to the normalized trace: σ_k on ((k-1)/n, k/n]."""
    sigma = A.singular_values(backend)
    return DecreasingStep(np.arange(1, A.n + 1) / A.n, sigma)


def _zygmund_matrix_trial(seed: int, size: int, trial: int, backend: str):
    rng = trial_rng(seed, trial, size)
    W = ginibre(rng, size)
    A = MatrixOp(float(np.exp(rng.uniform(0.0, 4.0))) * (W @ W.conj().T) / size)
    if A.frobenius() == 0:
        return None
    truncated = float(np.sum(triangular_truncate(A).singular_values(backend))) / size
    llogl = llogl_functional(normalized_trace_step(A, backend))
    return {"part": "matrix", "size": size, "trial": trial, "ratio": truncated / (1.0 + llogl), "lhs": truncated, "rhs": 1.0 + llogl}


def verify_zygmund(
    sizes: Sequence[int] = (16, 32),
    trials: int = 200,
    matrix_trials: int = 50,
    seed: int = 0,
    factor: float = 2.0,
    backend: str = "jacobi",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """(a) ‖Sμ‖_{L1(0,1)} <= ‖μ‖_{Λ_{t log(e/t)}} + ‖μ‖_{L1}, exact; (b) ‖T(A)‖_{1,τ} / (1 + LlogL(μ_A)), regression."""
    start = time.perf_counter()
    sizes = _check_sizes(sizes)
    function_rows, _ = _flatten(
        _run_trials(_zygmund_function_trial, [dict(seed=seed, trial=i) for i in range(trials)], n_jobs, progress, "zygmund-llogl (a)")
    )
    jobs = [dict(seed=seed, size=n, trial=i, backend=backend) for n in sizes for i in range(matrix_trials)]
    matrix_rows, skipped = _flatten(_run_trials(_zygmund_matrix_trial, jobs, n_jobs, progress, "zygmund-llogl (b)"))

    failures = [row for row in function_rows if row["lhs"] > row["rhs"] * (1 + MATRIX_RTOL)]
    matrix_frame = pd.DataFrame(matrix_rows)
    suite_max = _column_max(matrix_frame, "ratio")
    smallest = min(sizes)
    baseline = float(matrix_frame.loc[matrix_frame["size"] == smallest, "ratio"].max()) if matrix_rows else 0.0
    if failures:
        verdict = "fail"
    elif matrix_rows:
        verdict = regression_verdict(suite_max, baseline, factor)
        if verdict == "fail":
            failures = [{"part": "matrix", "suite_max": suite_max, "baseline": baseline, "factor": factor}]
    else:
        verdict = "exact-pass"

    report = ExperimentReport(
        theorem_id="zygmund-llogl",
        rule=(
            "(a) ‖Sμ‖_L1(0,1) <= ‖μ‖_Λ(t log(e/t)) + ‖μ‖_L1 (rtol 1e-10); "
            f"(b) max ‖T(A)‖_1,τ / (1 + LlogL) <= {factor:g} x its max at n = {smallest}"
        ),
        verdict=verdict,
        trials=trials,
        sizes=sizes,
        seed=seed,
        max_ratio=suite_max,
        per_size=per_size_max(matrix_frame),
        recorded={
            "function_max_ratio": max((row["ratio"] for row in function_rows), default=0.0),
            "matrix_baseline": baseline,
            "matrix_trials": matrix_trials,
        },
        skipped=skipped,
        failures=failures,
        per_trial=pd.DataFrame(function_rows + matrix_rows),
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# growth of ‖T‖_{S_p -> S_p} as p -> 1


P_BLOWUP_KINDS = ("ginibre", "zero-diagonal", "rank-one")


def _p_blowup_candidate(rng: np.random.Generator, size: int, kind: str) -> MatrixOp:
    if kind == "ginibre":
        return MatrixOp(ginibre(rng, size))
    if kind == "zero-diagonal":
        entries = ginibre(rng, size)
        np.fill_diagonal(entries, 0.0)
        return MatrixOp(entries)
    u, v = ginibre(rng, size)[:, 0], ginibre(rng, size)[:, 0]
    return MatrixOp(np.outer(u, v.conj()))


def _p_blowup_trial(seed: int, size: int, trial: int, p_grid: Sequence[float], backend: str):
    rng = trial_rng(seed, trial, size)
    kind = P_BLOWUP_KINDS[trial % len(P_BLOWUP_KINDS)]
    V = _p_blowup_candidate(rng, size, kind)
    TV = triangular_truncate(V)
    rows = []
    for p in p_grid:
        spec = SpaceSpec.lp(p, discrete=True)
        denominator = schatten_norm(V, spec, backend)
        if denominator == 0:
            return None
        rows.append({"size": size, "trial": trial, "kind": kind, "p": p, "ratio": schatten_norm(TV, spec, backend) / denominator})
    return rows


def p_norm_bracket(small_n: int = 100, large_n: int = 10_000, p_grid: Optional[Sequence[float]] = None) -> dict:
    """sup_p (p-1)‖a‖_p / ‖a‖_{m1inf} on harmonic sequences of two lengths.

    The ratio at ``large_n`` must fall inside [r_small / 2, 2 r_small].
    """
    p_grid = 1.0 + np.geomspace(1e-3, 1.0, 400) if p_grid is None else np.asarray(p_grid, dtype=float)
    m1inf = SpaceSpec.m1inf(discrete=True)
    ratios = {}
    for n in (small_n, large_n):
        a = sequences.harmonic(int(n))
        ratios[int(n)] = sup_p_blowup(a, p_grid) / norm(a, m1inf)
    r_small, r_large = ratios[int(small_n)], ratios[int(large_n)]
    lower, upper = r_small / 2.0, 2.0 * r_small
    return {
        "r_small": r_small,
        "r_large": r_large,
        "bracket": [lower, upper],
        "holds": bool(lower <= r_large <= upper),
        "small_n": int(small_n),
        "large_n": int(large_n),
    }


def verify_p_norm_bracket(small_n: int = 100, large_n: int = 10_000) -> ExperimentReport:
    start = time.perf_counter()
    bracket = p_norm_bracket(small_n, large_n)
    failures = [] if bracket["holds"] else [bracket]
    report = ExperimentReport(
        theorem_id="p-norm-bracket",
        rule="harmonic sup_p (p-1)‖a‖_p / ‖a‖_m1inf at the large length lies within [r/2, 2r] of the small length",
        verdict="regression-pass" if bracket["holds"] else "fail",
        trials=1,
        sizes=[int(small_n), int(large_n)],
        seed=0,
        max_ratio=max(bracket["r_small"], bracket["r_large"]),
        per_size={str(small_n): bracket["r_small"], str(large_n): bracket["r_large"]},
        recorded=bracket,
        failures=failures,
    )
    return _finish(report, start)


def verify_p_blowup(
    size: int = 32,
    p_grid: Sequence[float] = (1.1, 1.25, 1.5, 2.0),
    trials: int = 30,
    seed: int = 0,
    small_n: int = 100,
    large_n: int = 10_000,
    backend: str = "jacobi",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """Best-of random lower bounds for ‖T‖_{S_p -> S_p}, the fitted κ = max (p-1)·bound, and the (p-1)·ℓ_p versus M_{1,inf} bracket.

    At p = 2 the norm is exactly 1 and zero-diagonal inputs attain it.
    """
    start = time.perf_counter()
    size = _check_sizes([size])[0]
    p_grid = [float(p) for p in p_grid]
    if not p_grid or any(p < 1 or p > 2 for p in p_grid):
        raise DomainError(f"p grid must be a nonempty subset of [1, 2], got {p_grid}")
    jobs = [dict(seed=seed, size=size, trial=i, p_grid=p_grid, backend=backend) for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_p_blowup_trial, jobs, n_jobs, progress, "p-blowup"))
    frame = pd.DataFrame(rows)

    best = frame.groupby("p")["ratio"].max().to_dict() if not frame.empty else {}
    best = {float(p): float(value) for p, value in best.items()}
    kappa = max(((p - 1.0) * value for p, value in best.items() if p > 1), default=0.0)
    bracket = p_norm_bracket(small_n, large_n)

    failures = []
    if 2.0 in best and not 0.99 <= best[2.0] <= 1.0 + MATRIX_RTOL:
        failures.append({"p": 2.0, "best": best[2.0], "expected": "[0.99, 1]"})
    if not bracket["holds"]:
        failures.append({"bracket": bracket})

    report = ExperimentReport(
        theorem_id="p-blowup",
        rule="best ratio at p = 2 lies in [0.99, 1]; bracket ratio at the large length within [r/2, 2r]",
        verdict="fail" if failures else "regression-pass",
        trials=trials,
        sizes=[size],
        seed=seed,
        max_ratio=max(best.values(), default=0.0),
        per_size={f"p={p:g}": value for p, value in sorted(best.items())},
        recorded={"kappa": kappa, "best_lower_bounds": {f"{p:g}": v for p, v in sorted(best.items())}, "bracket": bracket},
        skipped=skipped,
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# commutator estimates


def _commutator_trial(seed: int, size: int, trial: int, functions: Sequence[str], backend: str):
    rng = trial_rng(seed, trial, size)
    A, B = MatrixOp(gue(rng, size)), MatrixOp(gue(rng, size))
    Y = A + MatrixOp(0.5 * gue(rng, size))
    rows = []
    for name in functions:
        f = parse_lipschitz(name)
        try:
            report = lipschitz_commutator_check(A, B, f, backend=backend)
            difference = lipschitz_difference_check(A, Y, f, backend=backend)
        except DegenerateInputError:
            continue
        rows.append(
            {
                "size": size,
                "trial": trial,
                "function": f.name,
                "ratio": report.ratio,
                "doi_residual": report.doi_residual,
                "difference_ratio": difference.ratio,
            }
        )
    return rows or None


def verify_commutator_lipschitz(
    size: int = 16,
    trials: int = 200,
    seed: int = 0,
    functions: Sequence[str] = ("abs", "sin", "pwl:-2,-0.5,0.5,2:1,-1,0.5,0"),
    backend: str = "jacobi",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """‖[f(A), B]‖_F <= Lip(f) ‖[A, B]‖_F, T_{f^[1]}([A, B]) = [f(A), B] and ‖f(X) - f(Y)‖_F <= Lip(f) ‖X - Y‖_F."""
    start = time.perf_counter()
    size = _check_sizes([size])[0]
    jobs = [dict(seed=seed, size=size, trial=i, functions=list(functions), backend=backend) for i in range(trials)]
    rows, skipped = _flatten(_run_trials(_commutator_trial, jobs, n_jobs, progress, "commutator-lipschitz"))
    frame = pd.DataFrame(rows)
    failures = [
        row
        for row in rows
        if row["ratio"] > 1 + MATRIX_RTOL or row["doi_residual"] > MATRIX_RTOL or row["difference_ratio"] > 1 + MATRIX_RTOL
    ]
    per_function = frame.groupby("function")["ratio"].max().to_dict() if not frame.empty else {}
    report = ExperimentReport(
        theorem_id="commutator-lipschitz",
        rule="commutator and difference ratios <= 1 + 1e-10, DOI residual <= 1e-10 (Frobenius)",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=[size],
        seed=seed,
        max_ratio=_column_max(frame, "ratio"),
        per_size=per_size_max(frame),
        recorded={
            "per_function": {str(k): float(v) for k, v in per_function.items()},
            "max_doi_residual": _column_max(frame, "doi_residual"),
            "max_difference_ratio": _column_max(frame, "difference_ratio"),
            "backend": backend,
        },
        skipped=skipped,
        failures=failures,
        per_trial=frame,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# optimal range of weak L1


def _optimal_range_trial(seed: int, trial: int, pieces: int, depth: int, lp_depth: int, solver: Optional[str]):
    rng = trial_rng(seed, trial)
    alpha = float(rng.uniform(0.01, 0.99))
    x = dyadic_power_step(alpha, pieces) * float(np.exp(rng.uniform(-1.0, 1.0)))
    result = kolmogorov_construct(x, depth)
    row = {
        "size": pieces,
        "trial": trial,
        "alpha": alpha,
        "l1_norm": result.l1_norm,
        "ratio": result.l1_norm / norm(x, SpaceSpec.weak_l1()),
        "feasible": result.feasible,
        "fnorm": None,
    }
    if solver is not None:
        fnorm = fnorm_upper(x, "lp:1", depth=lp_depth, extra_breakpoints=mu_step(result.y).breakpoints, solver=solver)
        row["fnorm"] = fnorm.value
        row["fnorm_feasible"] = fnorm.certificate.feasible
    return row


def verify_optimal_range_weak_l1(
    trials: int = 20,
    seed: int = 0,
    pieces: int = 32,
    depth: int = 20,
    lp_trials: int = 3,
    lp_depth: int = 1,
    solver: str = "bland",
    n_jobs: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """Constructs y in L1 with μ(x) <= Sμ(y) for dyadic t^-α; rejects t^-1.

    For the first ``lp_trials`` inputs the LP bound is also computed and must not exceed ‖y‖_1.
    """
    start = time.perf_counter()
    jobs = [
        dict(seed=seed, trial=i, pieces=pieces, depth=depth, lp_depth=lp_depth, solver=solver if i < lp_trials else None)
        for i in range(trials)
    ]
    rows, skipped = _flatten(_run_trials(_optimal_range_trial, jobs, n_jobs, progress, "weak-l1-optimal-range"))
    frame = pd.DataFrame(rows)

    failures = []
    for row in rows:
        if not (np.isfinite(row["l1_norm"]) and row["feasible"]):
            failures.append({"trial": row["trial"], "alpha": row["alpha"], "reason": "construction infeasible"})
        if row["fnorm"] is not None and (row["fnorm"] > row["l1_norm"] * (1 + 1e-6) or not row["fnorm_feasible"]):
            failures.append({"trial": row["trial"], "fnorm": row["fnorm"], "l1_norm": row["l1_norm"]})

    rejection = optimal_range_membership("L1", dyadic_power_step(1.0, pieces), depth)
    if rejection.member:
        failures.append({"case": "t^-1", "reason": "accepted as vanishing", "slope": rejection.slope})

    report = ExperimentReport(
        theorem_id="weak-l1-optimal-range",
        rule="construction feasible with finite ‖y‖_1 for every t^-α, α in (0.01, 0.99); t^-1 rejected; LP bound <= ‖y‖_1",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=[pieces],
        seed=seed,
        max_ratio=_column_max(frame, "ratio"),
        recorded={"rejection_slope": rejection.slope, "lp_trials": min(lp_trials, trials), "solver": solver},
        skipped=skipped,
        failures=failures,
        per_trial=frame.drop(columns=["fnorm_feasible"], errors="ignore"),
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# closed forms of S^d


def harmonic_sd_closed_form(n: np.ndarray) -> np.ndarray:
    """(S^d a)(n) = (H_{n+1} + 1)/(n+1) for a(k) = 1/(k+1), with H_m = ψ(m+1) + γ."""
    n = np.asarray(n, dtype=float)
    return (digamma(n + 2.0) + np.euler_gamma + 1.0) / (n + 1.0)


def verify_sd_closed_forms(length: int = 2001, asymptotic_n: int = 1000, trials: int = 50, seed: int = 0) -> ExperimentReport:
    """S^d δ_0 = 1/(n+1), harmonic telescoping, asymptotic shape, and S^d a(n) <= S^d a(⌊n/2⌋) <= 2 S^d a(n)."""
    start = time.perf_counter()
    if asymptotic_n >= length:
        raise DomainError("asymptotic_n must be smaller than length")
    failures = []
    n = np.arange(length)

    delta_sd = calderon_discrete(sequences.delta(0), length=length).entries.real
    delta_error = float(np.max(np.abs(delta_sd - 1.0 / (n + 1.0))))
    if delta_error > 0:
        failures.append({"case": "delta", "max_abs_error": delta_error})

    # the truncated harmonic input misses Σ_{k>=length} 1/(k(k+1)) = 1/length
    harmonic_sd = calderon_discrete(sequences.harmonic(length)).entries.real + 1.0 / length
    closed = harmonic_sd_closed_form(n)
    harmonic_error = float(np.max(np.abs(harmonic_sd - closed) / closed))
    if harmonic_error > EXACT_RTOL:
        failures.append({"case": "harmonic", "max_rel_error": harmonic_error})

    m = asymptotic_n
    two_term = (np.log(m + 1.0) + np.euler_gamma + 1.0) / (m + 1.0)
    shape_error = abs(harmonic_sd[m] - two_term) / two_term
    leading_ratio = float(harmonic_sd[m] / (np.log(m + 1.0) / (m + 1.0)))
    if shape_error > 0.05 or not 1.0 <= leading_ratio <= 2.0:
        failures.append({"case": "asymptotic", "shape_error": shape_error, "leading_ratio": leading_ratio})

    dilation_max = 0.0
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        a = Seq(np.sort(rng.exponential(1.0, size=int(rng.integers(1, 200))))[::-1], 0)
        sd = calderon_discrete(a, length=400).entries.real
        half = sd[np.arange(sd.size) // 2]
        if np.any(sd > half * (1 + EXACT_RTOL)) or np.any(half > 2.0 * sd * (1 + EXACT_RTOL)):
            failures.append({"case": "dilation", "trial": trial})
        dilation_max = max(dilation_max, float(np.max(half / sd)))

    report = ExperimentReport(
        theorem_id="sd-closed-forms",
        rule="S^d δ_0 = 1/(n+1) exactly; harmonic closed form to 1e-12; two-term asymptotics within 5%; dilation bounds",
        verdict=exact_verdict(failures),
        trials=trials,
        sizes=[length],
        seed=seed,
        max_ratio=leading_ratio,
        recorded={
            "delta_max_abs_error": delta_error,
            "harmonic_max_rel_error": harmonic_error,
            "asymptotic_n": m,
            "two_term_rel_error": shape_error,
            "ratio_to_log_n_over_n": leading_ratio,
            "max_half_dilation_ratio": dilation_max,
        },
        failures=failures,
    )
    return _finish(report, start)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Experiment:
    """Suite entry point plus the config keys feeding its keyword arguments."""

    function: Callable[..., ExperimentReport]
    params: Dict[str, str]
    trials_key: Optional[str] = None
    seeded: bool = True
    parallel: bool = True
    backend_key: Optional[str] = "SVD_BACKEND"


EXPERIMENTS: Dict[str, Experiment] = {
    "weak-type-truncation": Experiment(
        verify_weak_type_T,
        {"sizes": "WEAK_TYPE_SIZES", "bound": "WEAK_TYPE_BOUND", "pinching_bound": "PINCHING_BOUND"},
        "WEAK_TYPE_TRIALS",
    ),
    "mu-domination": Experiment(
        verify_mu_domination,
        {"sizes": "MU_DOMINATION_SIZES", "factor": "REGRESSION_FACTOR"},
        "MU_DOMINATION_TRIALS",
    ),
    "truncation-lower-bound": Experiment(
        verify_lower_bound_T,
        {"cases": "LOWER_BOUND_CASES", "length": "LOWER_BOUND_LENGTH", "check_to": "LOWER_BOUND_CHECK_TO"},
        seeded=False,
        parallel=False,
        backend_key=None,
    ),
    "calderon-doubling": Experiment(
        verify_s_by_s,
        {"lo_exp": "PROBE_LO_EXP", "hi_exp": "PROBE_HI_EXP", "per_decade": "PROBE_PER_DECADE"},
        "DOUBLING_TRIALS",
        backend_key=None,
    ),
    "hilbert-sandwich": Experiment(
        verify_hilbert_sandwich,
        {"lo_exp": "SANDWICH_LO_EXP", "hi_exp": "SANDWICH_HI_EXP", "per_decade": "SANDWICH_PER_DECADE"},
        "SANDWICH_TRIALS",
        backend_key=None,
    ),
    "zygmund-llogl": Experiment(
        verify_zygmund,
        {"sizes": "ZYGMUND_SIZES", "matrix_trials": "ZYGMUND_MATRIX_TRIALS", "factor": "REGRESSION_FACTOR"},
        "ZYGMUND_TRIALS",
    ),
    "p-blowup": Experiment(
        verify_p_blowup,
        {"size": "P_BLOWUP_SIZE", "p_grid": "P_BLOWUP_GRID", "small_n": "BRACKET_SMALL_N", "large_n": "BRACKET_LARGE_N"},
        "P_BLOWUP_TRIALS",
    ),
    "p-norm-bracket": Experiment(
        verify_p_norm_bracket,
        {"small_n": "BRACKET_SMALL_N", "large_n": "BRACKET_LARGE_N"},
        seeded=False,
        parallel=False,
        backend_key=None,
    ),
    "commutator-lipschitz": Experiment(
        verify_commutator_lipschitz,
        {"size": "COMMUTATOR_SIZE", "functions": "COMMUTATOR_FUNCTIONS"},
        "COMMUTATOR_TRIALS",
        backend_key="EIGH_BACKEND",
    ),
    "weak-l1-optimal-range": Experiment(
        verify_optimal_range_weak_l1,
        {
            "pieces": "OPTIMAL_RANGE_PIECES",
            "depth": "DYADIC_DEPTH",
            "lp_trials": "OPTIMAL_RANGE_LP_TRIALS",
            "lp_depth": "FNORM_GRID_DEPTH",
            "solver": "LP_SOLVER",
        },
        "OPTIMAL_RANGE_TRIALS",
        backend_key=None,
    ),
    "sd-closed-forms": Experiment(
        verify_sd_closed_forms,
        {"length": "SD_LENGTH", "asymptotic_n": "SD_ASYMPTOTIC_N"},
        "SD_DILATION_TRIALS",
        parallel=False,
        backend_key=None,
    ),
}


def resolve_experiment(name: str, aliases: Optional[Dict[str, str]] = None) -> str:
    key = name.strip().lower()
    aliases = {k.lower(): v for k, v in (aliases or {}).items()}
    key = aliases.get(key, key)
    if key not in EXPERIMENTS:
        known = sorted(set(EXPERIMENTS) | set(aliases))
        raise DomainError(f"unknown experiment '{name}', expected one of {known} or 'all'")
    return key


def run_experiment(
    name: str,
    params: Optional[dict] = None,
    aliases: Optional[Dict[str, str]] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    progress: bool = False,
) -> ExperimentReport:
    """Runs one registered suite with keyword arguments drawn from ``params`` (config values).

    Keys missing from ``params`` fall back to the suite defaults; ``seed`` and ``trials`` override the config.
    """
    key = resolve_experiment(name, aliases)
    experiment = EXPERIMENTS[key]
    params = params or {}
    kwargs = {arg: params[config_key] for arg, config_key in experiment.params.items() if config_key in params}
    if experiment.trials_key is not None:
        if trials is not None:
            kwargs["trials"] = int(trials)
        elif experiment.trials_key in params:
            kwargs["trials"] = int(params[experiment.trials_key])
    if experiment.seeded:
        if seed is not None:
            kwargs["seed"] = int(seed)
        elif "SEED" in params:
            kwargs["seed"] = int(params["SEED"])
    if experiment.parallel:
        kwargs["n_jobs"] = int(params.get("NUM_WORKERS", 1))
        kwargs["progress"] = progress
    if experiment.backend_key is not None and experiment.backend_key in params:
        kwargs["backend"] = params[experiment.backend_key]
    logger.info(f"running {key} with {kwargs}")
    return experiment.function(**kwargs)


def run_all(
    params: Optional[dict] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    progress: bool = False,
) -> List[ExperimentReport]:
    return [run_experiment(key, params, seed=seed, trials=trials, progress=progress) for key in EXPERIMENTS]
