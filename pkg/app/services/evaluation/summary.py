"""
Result Summaries
Per-(method, mask) PSNR statistics, paired differences and CSV writers.
"""
import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from app.schemas.metrics import MetricsRecord, PairedDifference, SummaryRow
from app.services.evaluation.metrics import format_psnr

PathLike = Union[str, Path]
GroupKey = Tuple[str, str]

RECORD_FIELDS = ["method", "mask", "image_index", "psnr_db", "sparsity", "seed"]
SUMMARY_FIELDS = ["method", "mask", "n", "mean_db", "median_db", "std_db"]
PAIRED_FIELDS = ["method", "mask", "baseline_method", "baseline_mask", "n", "mean_diff_db", "stderr_db"]


def group_records(records: Iterable[MetricsRecord]) -> Dict[GroupKey, List[MetricsRecord]]:
    """Records grouped by (method, mask) in lexicographic key order."""
    groups: Dict[GroupKey, List[MetricsRecord]] = defaultdict(list)
    for record in records:
        groups[(record.method, record.mask)].append(record)
    return {key: groups[key] for key in sorted(groups)}


def summarize(records: Iterable[MetricsRecord]) -> List[SummaryRow]:
    """
    Mean, median and population standard deviation of PSNR per group.

    Exact reconstructions carry +inf into the mean and median. The standard
    deviation covers the finite values only (0 when there are none) and the
    exact ones are counted in n_exact.

    Args:
        records: Evaluation records (nonempty)

    Returns:
        One SummaryRow per (method, mask), sorted lexicographically
    """
    groups = group_records(records)
    if not groups:
        raise ValueError("cannot summarise an empty record list")

    rows = []
    for (method, mask), members in groups.items():
        values = np.array([r.psnr_db for r in members], dtype=np.float64)
        finite = values[np.isfinite(values)]
        rows.append(SummaryRow(
            method=method,
            mask=mask,
            n=len(values),
            mean_db=float(values.mean()),
            median_db=float(np.median(values)),
            std_db=float(finite.std()) if finite.size else 0.0,
            n_exact=int(values.size - finite.size),
        ))
    return rows


def paired_differences(
    records: Iterable[MetricsRecord],
    baseline: GroupKey,
) -> List[PairedDifference]:
    """
    Mean PSNR difference of each group against a baseline over shared
    (seed, image_index) pairs.

    Args:
        records: Evaluation records
        baseline: (method, mask) of the reference group

    Returns:
        One PairedDifference per non-baseline group with at least one shared
        finite pair; stderr is the sample standard deviation over sqrt(n)
        (0 for a single pair)
    """
    groups = group_records(records)
    if baseline not in groups:
        raise KeyError(f"baseline group {baseline} has no records")
    reference = {(r.seed, r.image_index): r.psnr_db for r in groups[baseline]}

    results = []
    for (method, mask), members in groups.items():
        if (method, mask) == baseline:
            continue
        diffs = np.array([
            r.psnr_db - reference[(r.seed, r.image_index)]
            for r in members
            if (r.seed, r.image_index) in reference
            and math.isfinite(r.psnr_db) and math.isfinite(reference[(r.seed, r.image_index)])
        ], dtype=np.float64)
        if diffs.size == 0:
            continue
        stderr = float(diffs.std(ddof=1) / math.sqrt(diffs.size)) if diffs.size > 1 else 0.0
        results.append(PairedDifference(
            method=method,
            mask=mask,
            baseline_method=baseline[0],
            baseline_mask=baseline[1],
            n=int(diffs.size),
            mean_diff_db=float(diffs.mean()),
            stderr_db=stderr,
        ))
    return results


def _write_rows(path: PathLike, fields: List[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def write_records_csv(records: Iterable[MetricsRecord], path: PathLike) -> Path:
    """Write method,mask,image_index,psnr_db,sparsity,seed rows."""
    return _write_rows(path, RECORD_FIELDS, (
        {
            "method": r.method,
            "mask": r.mask,
            "image_index": r.image_index,
            "psnr_db": format_psnr(r.psnr_db),
            "sparsity": repr(r.sparsity),
            "seed": r.seed,
        }
        for r in records
    ))


def write_summary_csv(rows: Iterable[SummaryRow], path: PathLike) -> Path:
    """Write method,mask,n,mean_db,median_db,std_db rows."""
    return _write_rows(path, SUMMARY_FIELDS, (
        {
            "method": r.method,
            "mask": r.mask,
            "n": r.n,
            "mean_db": format_psnr(r.mean_db),
            "median_db": format_psnr(r.median_db),
            "std_db": repr(r.std_db),
        }
        for r in rows
    ))


def write_paired_csv(rows: Iterable[PairedDifference], path: PathLike) -> Path:
    """Write method,mask,baseline_method,baseline_mask,n,mean_diff_db,stderr_db rows."""
    return _write_rows(path, PAIRED_FIELDS, (
        {
            "method": r.method,
            "mask": r.mask,
            "baseline_method": r.baseline_method,
            "baseline_mask": r.baseline_mask,
            "n": r.n,
            "mean_diff_db": repr(r.mean_diff_db),
            "stderr_db": repr(r.stderr_db),
        }
        for r in rows
    ))
