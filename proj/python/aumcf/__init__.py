"""Area under the mean cumulative function for recurrent events with a terminal event."""

from ._core import (
    ArmDataset,
    AumcfError,
    StudyDataset,
    __version__,
    augmented_compare,
    aumcf,
    bootstrap_se,
    compare,
    estimate,
    from_records,
    generate_dataset,
    influence_values,
    km,
    mcf,
    read_csv,
    rmst,
    run_cli,
    simulate,
    time_lost,
    true_values,
    weighted_compare,
)

__all__ = [
    "ArmDataset",
    "AumcfError",
    "StudyDataset",
    "__version__",
    "augmented_compare",
    "aumcf",
    "bootstrap_se",
    "compare",
    "estimate",
    "from_records",
    "generate_dataset",
    "influence_values",
    "km",
    "mcf",
    "read_csv",
    "rmst",
    "run_cli",
    "simulate",
    "time_lost",
    "true_values",
    "weighted_compare",
]
