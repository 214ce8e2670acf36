"""Configuration, persistence and the packaged experiment drivers."""
from .config import ConfigError, RunConfig, load_config, parse_config
from .io import (
    CheckpointConsistencyError,
    CheckpointError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    load_checkpoint,
    read_observables_csv,
    save_checkpoint,
    write_observables_csv,
)
