import json
import os
import contextlib
import yaml
import numpy as np
from joblib import parallel


def read_yaml(data_path: str):
    with open(data_path, "r") as file:
        data = yaml.safe_load(file)
    return data


def read_json(data_path: str):
    with open(data_path, "r") as file:
        data = json.load(file)
    return data


def write_json(data, data_path: str):
    with open(data_path, "w") as file:
        file.write(dumps_json(data))
        file.write("\n")


def dumps_json(data) -> str:
    # json uses repr() for floats, which round-trips (17 significant digits at most)
    return json.dumps(to_builtin(data), indent=2, sort_keys=False)


def to_builtin(value):
    """Recursively convert numpy scalars/arrays into JSON-serialisable builtins."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for one trial, derived from the master seed and the trial coordinates.

    The stream depends only on (seed, keys), so serial and parallel runs agree.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def num_workers(requested: int) -> int:
    cap = os.environ.get("CALDERON_THREADS")
    if cap is None:
        return requested
    return max(1, min(requested, int(cap)))


@contextlib.contextmanager
def tqdm_joblib(tqdm_object):
    """Context manager to patch joblib to report into tqdm progress bar given as argument"""

    class TqdmBatchCompletionCallback(parallel.BatchCompletionCallBack):
        def __call__(self, *args, **kwargs):
            tqdm_object.update(n=self.batch_size)
            return super().__call__(*args, **kwargs)

    old_batch_callback = parallel.BatchCompletionCallBack
    parallel.BatchCompletionCallBack = TqdmBatchCompletionCallback
    try:
        yield tqdm_object
    finally:
        parallel.BatchCompletionCallBack = old_batch_callback
        tqdm_object.close()
