from .config import RunConfig, load_config
from .experiment import (ExperimentReport, emit_trajectory_bundle, ingest, run_experiment,
                         sweep_tsas, trace)
