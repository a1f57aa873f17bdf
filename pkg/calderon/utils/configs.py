import os
import sys
import datetime
import logging
from ast import literal_eval
from pathlib import Path
from calderon.utils.data import read_yaml


LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_logger(name: str = "calderon"):
    # Create a custom logger
    logger = logging.getLogger(name)

    # Set the logging level to INFO
    logger.setLevel(logging.INFO)

    # Only attach a console handler once per logger
    if not logger.handlers:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(console_handler)
    return logger


def try_literal_eval(val):
    try:
        # Attempt to evaluate as a literal
        return literal_eval(val)
    except (ValueError, SyntaxError):
        # If evaluation fails means input is actually a string
        if val == "null":
            return None
        if (val == "false") | (val == "true"):
            return literal_eval(val.title())
        return val


def override_config(config: dict, overrides: list):
    # Process the overrides if provided
    if overrides:
        if len(overrides) % 2 != 0:
            raise ValueError("Overrides must be provided as key-value pairs.")

        # Convert the list to a dictionary
        overrides = {
            overrides[i]: overrides[i + 1] for i in range(0, len(overrides), 2)
        }

        # Only keys already present in the 'params' section can be overridden
        for key, value in overrides.items():
            if key in config["params"]:
                config["params"][key] = try_literal_eval(value)
            else:
                raise KeyError(
                    f"Key '{key}' not found in the 'params' section of the config."
                )


def read_key_value_file(path: str) -> list:
    """Reads KEY=VALUE lines (blank lines and '#' comments ignored) into a flat override list."""
    overrides = []
    with open(path, "r") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_number}: expected KEY=VALUE, got '{line}'")
            key, value = line.split("=", 1)
            overrides.extend([key.strip(), value.strip()])
    return overrides


def get_project_root():
    """Dynamically determine the project root."""
    return Path(__file__).resolve().parent.parent.parent


def update_config_paths(config, project_root):
    # Prepend project_root / 'outputs' to all output paths
    for key, value in config["paths"].get("output_paths", {}).items():
        config["paths"]["output_paths"][key] = project_root / "outputs" / value
    return config


def load_config(config_file: str = "base_config.yaml", overrides: list = None):
    """Load the YAML configuration file and apply overrides."""
    project_root = get_project_root()
    config_path = Path(config_file)
    if not config_path.is_absolute():
        config_path = project_root / "configs" / config_file
    config = update_config_paths(read_yaml(config_path), project_root)
    if overrides:
        override_config(config, overrides)
    return config, project_root


def get_setup(
    run_name: str,
    overrides: list = None,
    config_file: str = "base_config.yaml",
    log_to_file: bool = True,
):
    config, project_root = load_config(config_file=config_file, overrides=overrides)
    params = config["params"]
    paths = dict(config["paths"]["output_paths"])

    timestamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%d_%H-%M-%S %Z").strip()

    # Initialize the root logger; library modules log through logging.getLogger(__name__)
    logger = logging.getLogger()
    logger.setLevel(logging.INFO)
    formatter = logging.Formatter(
        fmt="%(asctime)s %(levelname)-4s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S %Z",
    )

    handlers = []
    full_log_path = None
    if log_to_file:
        log_dir = paths["LOG_DIR"]
        os.makedirs(log_dir, exist_ok=True)
        full_log_path = os.path.join(log_dir, f"{timestamp}_{run_name}.log".replace(" ", "_"))
        file_handler = logging.FileHandler(full_log_path, mode="w")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
        handlers.append(file_handler)

    # Results go to stdout, so the console log goes to the diagnostic stream
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)
    handlers.append(stream_handler)

    if full_log_path is not None:
        logger.info(f"Logging to {full_log_path} and console...")

    return {
        "params": params,
        "aliases": config.get("experiment_aliases", {}) or {},
        "paths": paths,
        "timestamp": timestamp,
        "logger": logger,
        "ROOT_PATH": project_root,
        "handlers": handlers,
    }
