"""Black-box differential adversarial input generation.

Given two opaque prediction oracles trained for the same task, a
hill-climbing search perturbs a seed input one pixel at a time to find a
difference-inducing adversarial example: an input the two oracles answer
differently while staying close to the seed. Campaign helpers measure
differential success rates, perturbation sizes, and query costs across
seed sets and model pairs.
"""

from .attack import (AttackConfig, AttackError, AttackResult, AttackStatus,
                     ConfigurationError, DivergenceMode, divergence, fitness,
                     hill_climb, is_success, mutate)
from .campaign import derive_run_seed, dsr_matrix, render_matrix_csv, run_campaign
from .io import (ReportDocument, SeedSet, load_model, load_seeds, read_report,
                 read_report_csv, save_adversarial, save_model, write_report,
                 write_seed_files)
from .metrics import (AdversarialEntry, CampaignRecord, DsrReport, Histogram,
                      dsr_differential, dsr_nondifferential, histogram)
from .oracle import (AccessLevel, LayerSpec, LocalModel, LocalOracle, Oracle,
                     Prediction, ProtocolError, RemoteOracle, TaskKind,
                     TransportError, forward)
from .stubserver import StubModelServer
from .tensor import InputTensor, l1_distance, l2_distance, set_pixel

__version__ = "0.1.0"

__all__ = [
    "AccessLevel",
    "AdversarialEntry",
    "AttackConfig",
    "AttackError",
    "AttackResult",
    "AttackStatus",
    "CampaignRecord",
    "ConfigurationError",
    "DivergenceMode",
    "DsrReport",
    "Histogram",
    "InputTensor",
    "LayerSpec",
    "LocalModel",
    "LocalOracle",
    "Oracle",
    "Prediction",
    "ProtocolError",
    "RemoteOracle",
    "ReportDocument",
    "SeedSet",
    "StubModelServer",
    "TaskKind",
    "TransportError",
    "derive_run_seed",
    "divergence",
    "dsr_differential",
    "dsr_matrix",
    "dsr_nondifferential",
    "fitness",
    "forward",
    "hill_climb",
    "histogram",
    "is_success",
    "l1_distance",
    "l2_distance",
    "load_model",
    "load_seeds",
    "mutate",
    "read_report",
    "read_report_csv",
    "render_matrix_csv",
    "run_campaign",
    "save_adversarial",
    "save_model",
    "set_pixel",
    "write_report",
    "write_seed_files",
]
