"""Configuration settings for the weight-tuple primitivity toolkit."""

import os
import logging
from typing import Dict, Any

# Run Configuration
RUN_CONFIG = {
    "seed": int(os.getenv("PRIM_SEED", "42")),
    "search_bound": int(os.getenv("PRIM_SEARCH_BOUND", "8")),
    "sample_count": int(os.getenv("PRIM_SAMPLES", "20")),
    "time_budget_ms": int(os.getenv("PRIM_TIME_BUDGET_MS", "60000")),
    "cache_dir": os.getenv("PRIM_CACHE_DIR", ".prim_cache"),
    "cache_enabled": os.getenv("PRIM_CACHE", "true").lower() == "true",
    "workers": int(os.getenv("PRIM_WORKERS", "1")),
}

# Character Engine Configuration
CHARS_CONFIG = {
    "use_e6_fastpath": os.getenv("PRIM_E6_FASTPATH", "true").lower() == "true",
    "max_orbit_size": int(os.getenv("PRIM_MAX_ORBIT", "2000000")),
}

# Cone / LP Configuration
CONES_CONFIG = {
    "suter_draws": int(os.getenv("PRIM_SUTER_DRAWS", "10000")),
    "random_coord_range": 9,  # coordinates drawn from [-9, 9]
}

# Separation Index Configuration
SEP_CONFIG = {
    "max_exact_rank": 4,
}

# Quiver Configuration
QUIVER_CONFIG = {
    "entry_range": 10,  # matrix entries drawn from [-10, 10]
    "prime": 2147483647,  # 2^31 - 1
    "max_schofield_size": int(os.getenv("PRIM_MAX_SCHOFIELD", "40")),
}

# Flag Variety Configuration
FLAGS_CONFIG = {
    "entry_range": 5,  # t in exp(tX) drawn from [-5, 5] without 0
    "supported_families": ["A", "B", "C", "D"],
}

# Primitivity Engine Configuration
PRIM_CONFIG = {
    "gamma_height_bound": int(os.getenv("PRIM_GAMMA_HEIGHT", "4")),
    "gamma_max_tuples": int(os.getenv("PRIM_GAMMA_MAX_TUPLES", "400")),
}

# Logging Configuration
LOGGING_CONFIG = {
    "level": os.getenv("PRIM_LOG_LEVEL", "WARNING").upper(),
    "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
}

EXIT_CODES = {
    "definite": 0,
    "usage": 1,
    "unknown": 2,
}


def get_config() -> Dict[str, Any]:
    """Get complete configuration dictionary."""
    return {
        "run": RUN_CONFIG,
        "chars": CHARS_CONFIG,
        "cones": CONES_CONFIG,
        "sep": SEP_CONFIG,
        "quiver": QUIVER_CONFIG,
        "flags": FLAGS_CONFIG,
        "prim": PRIM_CONFIG,
        "logging": LOGGING_CONFIG,
    }


def get_run_config(**overrides: Any) -> Dict[str, Any]:
    """Merge CLI overrides into the environment-driven run configuration."""
    config = dict(RUN_CONFIG)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in config:
            raise ValueError(f"Unknown run configuration field: {key}")
        config[key] = value

    for key in ("search_bound", "sample_count", "time_budget_ms", "workers"):
        if int(config[key]) <= 0:
            raise ValueError(f"Run configuration field '{key}' must be positive, got {config[key]}")
    if int(config["seed"]) < 0 or int(config["seed"]) >= 2 ** 64:
        raise ValueError(f"Seed must be a 64-bit nonnegative integer, got {config['seed']}")

    return config


def setup_logging(level: str = None) -> None:
    """Configure root logging; logs go to stderr so stdout stays JSON."""
    logging.basicConfig(
        level=getattr(logging, (level or LOGGING_CONFIG["level"]).upper(), logging.WARNING),
        format=LOGGING_CONFIG["format"],
    )


def log_config() -> None:
    """Print the current configuration (for debugging)."""
    import pprint
    pprint.pprint(get_config())
