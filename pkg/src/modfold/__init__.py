"""Folded (modulo) sampling of bandlimited functions: instability certificates and bounded recovery."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BandlimitedSignal,
    DensityReport,
    FoldedSamples,
    SeparatedSet,
    density_report,
    eval_signal,
    fold,
    fold_counts,
    toral_dist,
    toral_seq_dist,
)
from .exceptions import DomainError, InfeasibleError, ModfoldError, NumericalError, UsageError  # noqa: E402

__all__ = [
    "__version__",
    "BandlimitedSignal",
    "DensityReport",
    "FoldedSamples",
    "SeparatedSet",
    "density_report",
    "eval_signal",
    "fold",
    "fold_counts",
    "toral_dist",
    "toral_seq_dist",
    "DomainError",
    "InfeasibleError",
    "ModfoldError",
    "NumericalError",
    "UsageError",
]
