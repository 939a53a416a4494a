from dataclasses import dataclass

import numpy as np

from adaptiveGHX.matcore import svd_values

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ControllabilityReport:
    c_matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    condition_number: float


def controllability_matrix(a, b):
    """C_{n-1} = [B, AB, A^2 B, ..., A^{n-1} B]."""
    blocks = [b]
    for _ in range(a.shape[0] - 1):
        blocks.append(a @ blocks[-1])
    return np.hstack(blocks)


def controllability_report(a, b):
    """
    Rank test of (A, B) from the singular values of C_{n-1}.

    Rank counts singular values above RANK_RTOL * sigma_max; the condition number is
    sigma_max over the smallest of those.
    """
    c_matrix = controllability_matrix(a, b)
    values = svd_values(c_matrix)
    kept = values[values > RANK_RTOL * values[0]] if values[0] > 0 else values[:0]
    condition = float(kept[0] / kept[-1]) if kept.size else np.inf
    return ControllabilityReport(
        c_matrix=c_matrix,
        singular_values=values,
        rank=int(kept.size),
        condition_number=condition,
    )
