import hashlib
import os
import platform
import datetime
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from typing import Dict, List, Optional
from calderon.utils.data import dumps_json, to_builtin, write_json

VERDICTS = ("exact-pass", "regression-pass", "recorded", "fail")
FLOAT_FORMAT = "%.17g"
GOLDEN_OFFSET = (np.sqrt(5.0) - 1.0) / 2.0


def probe_grid(lo_exp: int = -4, hi_exp: int = 4, per_decade: int = 64) -> np.ndarray:
    """Logarithmic probe points 10^(lo + (k + θ)/per_decade) with an irrational shift θ.

    The shift keeps probes off dyadic and decimal breakpoints.
    """
    k = np.arange(per_decade * (hi_exp - lo_exp))
    return 10.0 ** (lo_exp + (k + GOLDEN_OFFSET) / per_decade)


@dataclass
class ExperimentReport:
    """Outcome of one verification suite.

    Everything except ``metadata`` is a pure function of (sizes, trials, seed); ``fingerprint`` hashes
    exactly that part.
    """

    theorem_id: str
    rule: str
    verdict: str
    trials: int
    sizes: List[int]
    seed: int
    max_ratio: float
    per_size: Dict[str, float] = field(default_factory=dict)
    recorded: Dict[str, object] = field(default_factory=dict)
    skipped: int = 0
    failures: List[dict] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)
    per_trial: Optional[pd.DataFrame] = field(default=None, repr=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict '{self.verdict}', expected one of {VERDICTS}")

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self, include_metadata: bool = True) -> dict:
        data = {
            "theorem_id": self.theorem_id,
            "rule": self.rule,
            "verdict": self.verdict,
            "trials": self.trials,
            "sizes": list(self.sizes),
            "seed": self.seed,
            "max_ratio": self.max_ratio,
            "per_size": {str(k): v for k, v in self.per_size.items()},
            "recorded": self.recorded,
            "skipped": self.skipped,
            "failures": self.failures[:20],
            "num_failures": len(self.failures),
        }
        if include_metadata:
            data["metadata"] = self.metadata
        return to_builtin(data)

    def fingerprint(self) -> str:
        return hashlib.sha256(dumps_json(self.to_dict(include_metadata=False)).encode()).hexdigest()

    def stamp(self, runtime: float):
        self.metadata.update(
            {
                "runtime_seconds": runtime,
                "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "host": platform.node(),
                "python": platform.python_version(),
            }
        )
        return self


def exact_verdict(failures: list) -> str:
    return "exact-pass" if not failures else "fail"


def regression_verdict(suite_max: float, baseline: float, factor: float = 2.0) -> str:
    """Stability rule: the suite maximum may not exceed ``factor`` times the smallest-size maximum."""
    if not np.isfinite(suite_max):
        return "fail"
    return "regression-pass" if suite_max <= factor * baseline else "fail"


def per_size_max(frame: pd.DataFrame, column: str = "ratio") -> Dict[str, float]:
    if frame.empty:
        return {}
    grouped = frame.groupby("size")[column].max()
    return {str(size): float(value) for size, value in grouped.items()}


def summary_frame(reports: List[ExperimentReport]) -> pd.DataFrame:
    rows = [
        {
            "theorem_id": r.theorem_id,
            "verdict": r.verdict,
            "trials": r.trials,
            "seed": r.seed,
            "max_ratio": r.max_ratio,
            "skipped": r.skipped,
            "failures": len(r.failures),
            "runtime_seconds": r.metadata.get("runtime_seconds", np.nan),
        }
        for r in reports
    ]
    return pd.DataFrame(rows)


def trials_frame(reports: List[ExperimentReport]) -> pd.DataFrame:
    frames = [r.per_trial.assign(theorem_id=r.theorem_id) for r in reports if r.per_trial is not None]
    if not frames:
        return pd.DataFrame()
    frame = pd.concat(frames, ignore_index=True)
    columns = ["theorem_id"] + [c for c in frame.columns if c != "theorem_id"]
    return frame[columns]


def report_payload(reports: List[ExperimentReport], seed: Optional[int] = None, include_metadata: bool = True) -> dict:
    """Report header (overall verdict and the seed the suites ran with) followed by one entry per suite."""
    return {
        "passed": all(r.passed for r in reports),
        "seed": seed,
        "experiments": [r.to_dict(include_metadata) for r in reports],
    }


def save_reports(
    reports: List[ExperimentReport], output_path: str, include_metadata: bool = True, seed: Optional[int] = None
) -> List[str]:
    """Writes the JSON report and, next to it, a CSV of per-trial ratios. Returns the written paths."""
    output_dir = os.path.dirname(os.path.abspath(output_path))
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)

    write_json(report_payload(reports, seed, include_metadata), output_path)

    written = [output_path]
    trials = trials_frame(reports)
    if not trials.empty:
        csv_path = os.path.splitext(output_path)[0] + "_trials.csv"
        trials.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
        written.append(csv_path)
    return written
