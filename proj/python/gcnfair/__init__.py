"""GCN link prediction with within-group degree analysis and fairness tools."""

from ._core import (
    Dataset,
    GcnfairError,
    Model,
    delta,
    delta_hat,
    forward,
    init_model,
    load_checkpoint,
    load_dataset,
    make_dataset,
    normalized_adjacency,
    nrmse,
    pcc,
    propagation_bounds,
    roc_auc,
    run_delta_comparison,
    run_fairness_sweep,
    run_train,
    run_validate_theory,
    score_pairs,
    synth_generate,
    theory_report,
    within_group_degrees,
)

__all__ = [
    "Dataset",
    "GcnfairError",
    "Model",
    "delta",
    "delta_hat",
    "forward",
    "init_model",
    "load_checkpoint",
    "load_dataset",
    "make_dataset",
    "normalized_adjacency",
    "nrmse",
    "pcc",
    "propagation_bounds",
    "roc_auc",
    "run_delta_comparison",
    "run_fairness_sweep",
    "run_train",
    "run_validate_theory",
    "score_pairs",
    "synth_generate",
    "theory_report",
    "within_group_degrees",
]
