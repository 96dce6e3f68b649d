"""
Deterministic power-law path loss and the cooperative decode rule.

A set of transmitters Omega reaches node k when

    p_t * sum_{j in Omega} d(j, k)^-alpha >= tau

with no fading, shadowing or interference. A zero distance saturates the sum
(infinite received power), so duplicate coordinates always decode.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from .network_model import ModelParams
from .utils.errors import InvalidParameterError

SATURATED = math.inf

Coordinate = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class PowerSum:
    """Accumulated received power; `saturated` means some transmitter sat at distance zero."""
    value: float
    saturated: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise InvalidParameterError(f"PowerSum.value must be >= 0, got {self.value}")

    def reaches(self, tau: float) -> bool:
        return self.saturated or self.value >= tau


def path_gain(d: float, alpha: float) -> float:
    """d^-alpha, or SATURATED for d == 0."""
    if d < 0:
        raise InvalidParameterError(f"Distance must be >= 0, got {d}")
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    if d == 0:
        return SATURATED
    return float(d) ** (-alpha)


def transmission_radius(params: ModelParams) -> float:
    """r solving p_t * r^-alpha = tau."""
    return (params.p_t / params.tau) ** (1.0 / params.alpha)


def normalize(params: ModelParams, dimension: int) -> float:
    """
    Effective density in units of the transmission radius: lam * r^dimension.

    Measuring lengths in units of r maps any (p_t, tau) onto p_t = tau, which is
    the normalization the regime conditions are stated in.
    """
    if dimension not in (1, 2):
        raise InvalidParameterError(f"dimension must be 1 or 2, got {dimension}")
    return params.lam * transmission_radius(params) ** dimension


def _as_rows(coords, dimension: int) -> np.ndarray:
    arr = np.asarray(coords, dtype=np.float64)
    return arr.reshape(-1, dimension)


def pairwise_gains(sources: np.ndarray, targets: np.ndarray, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gain matrix of shape (len(sources), len(targets)) plus a per-target flag that
    is set when some source coincides with the target. Coincident pairs carry
    gain 0 in the matrix; the flag carries the saturation instead.
    """
    distances = cdist(sources, targets)
    coincident = distances == 0.0
    with np.errstate(divide='ignore'):
        gains = np.where(coincident, 0.0, np.power(np.where(coincident, 1.0, distances), -alpha))
    return gains, coincident.any(axis=0)


def received_power(sources, target: Coordinate, params: ModelParams) -> PowerSum:
    """
    Power at `target` when every coordinate in `sources` transmits at p_t.

    The sum is evaluated with math.fsum, so it is correctly rounded and does not
    depend on the order of `sources`.
    """
    target_arr = np.atleast_1d(np.asarray(target, dtype=np.float64))
    dimension = target_arr.size
    if dimension not in (1, 2):
        raise InvalidParameterError(f"target must be a scalar or a pair, got {target!r}")
    if isinstance(sources, (set, frozenset)):
        sources = sorted(sources)
    src = _as_rows(sources, dimension) if np.size(sources) else np.empty((0, dimension))
    if len(src) == 0:
        return PowerSum(0.0)
    gains, saturated = pairwise_gains(src, target_arr.reshape(1, dimension), params.alpha)
    value = params.p_t * math.fsum(gains[:, 0].tolist())
    return PowerSum(value=value, saturated=bool(saturated[0]))


def can_decode(sources, target: Coordinate, params: ModelParams) -> bool:
    """True iff the cooperative sum from `sources` meets tau at `target` (inclusive)."""
    return received_power(sources, target, params).reaches(params.tau)
