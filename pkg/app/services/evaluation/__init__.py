from app.services.evaluation.metrics import EXACT, EmptyReferenceError, psnr, zero_filled, format_psnr
from app.services.evaluation.harness import (
    ZERO_FILLED,
    UNET,
    EvaluationEntry,
    realize_mask,
    reconstruct,
    evaluate_suite,
)
from app.services.evaluation.summary import (
    summarize,
    paired_differences,
    write_records_csv,
    write_summary_csv,
    write_paired_csv,
)

__all__ = [
    "EXACT",
    "EmptyReferenceError",
    "psnr",
    "zero_filled",
    "format_psnr",
    "ZERO_FILLED",
    "UNET",
    "EvaluationEntry",
    "realize_mask",
    "reconstruct",
    "evaluate_suite",
    "summarize",
    "paired_differences",
    "write_records_csv",
    "write_summary_csv",
    "write_paired_csv",
]
