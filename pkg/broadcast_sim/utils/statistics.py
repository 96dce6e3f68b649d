"""
Binomial summaries shared by the Monte Carlo entry points.
"""

import math
from dataclasses import dataclass
from typing import Tuple

from scipy.stats import norm

from .errors import InvalidParameterError


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion, clipped to [0, 1]."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise InvalidParameterError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise InvalidParameterError("confidence must lie in (0, 1)")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / trials
    z2n = z * z / trials
    center = (p_hat + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    lo = max(0.0, center - half)
    hi = min(1.0, center + half)
    # Rounding can push the bounds a hair past p_hat at the extremes
    return min(lo, p_hat), max(hi, p_hat)


@dataclass(frozen=True)
class Frequency:
    """Empirical frequency of an event over independent trials."""
    successes: int
    trials: int

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise InvalidParameterError(f"Invalid frequency {self.successes}/{self.trials}")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    def interval(self, confidence: float = 0.95) -> Tuple[float, float]:
        return wilson_interval(self.successes, self.trials, confidence)
