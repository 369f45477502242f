"""Dense linear solve with explicit singularity detection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["SolveReport", "lu_solve", "PIVOT_THRESHOLD"]

# A pivot smaller than this fraction of the largest initial entry flags the
# matrix as singular; cheap and deterministic, which is all the fixed-point
# abort logic needs.
PIVOT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray | None
    singular: bool
    pivot_ratio: float  # smallest |pivot| / largest initial |entry|


def lu_solve(matrix, rhs) -> SolveReport:
    """Solve matrix @ x = rhs by LU with partial pivoting.

    Returns a report instead of raising: `singular` is set when any pivot
    magnitude falls below PIVOT_THRESHOLD times the largest initial entry
    (or the matrix is all zeros), and then no solution is present.
    """
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError(f"rhs shape {b.shape} does not match matrix {a.shape}")

    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return SolveReport(None, True, 0.0)

    with warnings.catch_warnings():
        # lu_factor warns on an exactly-zero pivot; the pivot check below
        # is the real decision point.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    ratio = float(np.min(np.abs(np.diag(lu))) / scale)
    if ratio < PIVOT_THRESHOLD:
        return SolveReport(None, True, ratio)
    x = scipy.linalg.lu_solve((lu, piv), b)
    return SolveReport(x, False, ratio)
