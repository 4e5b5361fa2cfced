"""Closed-form effect of element-granularity dropout on burst and row metrics.

Serves as the oracle for the element-masked baseline: with requests of C
columns, K elements per burst, and element droprate alpha, a burst survives
unless all K of its elements are masked, so actual traffic shrinks by
(1 - alpha^K) while the algorithm only wanted (1 - alpha) of it.
"""

import warnings
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    requests: int            # Q, random reads
    columns_per_request: int  # C, contiguous columns each
    columns_per_row: int     # N
    columns_per_burst: int   # M, divides N
    elements_per_burst: int  # K
    droprate: float          # alpha

    def __post_init__(self):
        if self.columns_per_row % self.columns_per_burst:
            raise ValueError("columns_per_burst must divide columns_per_row")
        if not 0.0 <= self.droprate <= 1.0:
            raise ValueError("droprate must be in [0, 1]")


@dataclass(frozen=True)
class AccessEstimate:
    actual: float   # expected column accesses after whole-burst drops
    desired: float  # column accesses the algorithm actually wants


def expected_actual_bursts(p: ModelParams) -> AccessEstimate:
    qc = p.requests * p.columns_per_request
    return AccessEstimate(
        actual=qc * (1.0 - p.droprate**p.elements_per_burst),
        desired=qc * (1.0 - p.droprate),
    )


def row_skip_probability(p: ModelParams) -> float:
    """Upper bound on skipping a whole row: alpha^(C*K/M)."""
    exponent = p.columns_per_request * p.elements_per_burst / p.columns_per_burst
    if exponent != int(exponent):
        warnings.warn(
            f"C*K/M = {exponent} is not integral; using the real exponent",
            stacklevel=2,
        )
    if p.droprate == 0.0:
        return 0.0
    return float(p.droprate**exponent)


def inefficiency_ratio(alpha: float, k: int) -> float:
    """Element-masked actual accesses over ideal proportional dropout.

    Equals the geometric sum 1 + alpha + ... + alpha^(K-1), so it lies in
    [1, K] and grows in both arguments; at alpha = 1 the limit K is returned.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    if alpha == 1.0:
        warnings.warn("alpha = 1 is outside the stated domain; returning the limit K",
                      stacklevel=2)
        return float(k)
    return (1.0 - alpha**k) / (1.0 - alpha)
