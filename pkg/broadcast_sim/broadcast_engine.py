"""
Level-set cooperative broadcast.

Round t+1 decodes every node whose power from *all* nodes decoded up to round t
meets the threshold:

    D_{t+1} = D_t U {k : p_t * sum_{j in D_t} d(j, k)^-alpha >= tau},  D_0 = {source}

The engine runs to the least fixed point. `BroadcastEngine.run` keeps a running
per-node power and only adds the contributions of nodes decoded in the last
round; `BroadcastEngine.run_oracle` recomputes every sum from scratch and is
meant for small instances and cross-checks.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .network_model import ModelParams, Realization
from .propagation import pairwise_gains, received_power
from .utils.errors import InvalidParameterError, InvariantViolationError
from .utils.logger import LoggingMixin

NEVER = -1  # decode_round of nodes the broadcast never reaches


@dataclass(frozen=True, eq=False)
class BroadcastOutcome:
    """Result of one broadcast run on one realization."""
    decode_round: np.ndarray
    rounds: int
    full_coverage: bool
    reached_count: int
    max_extent: float
    node_count: int
    vacuous: bool = False  # source-only network: coverage holds trivially

    @property
    def decoded(self) -> np.ndarray:
        return self.decode_round != NEVER

    @property
    def reach_fraction(self) -> float:
        return self.reached_count / self.node_count

    def summary(self) -> Dict:
        return {
            'node_count': self.node_count,
            'reached_count': self.reached_count,
            'rounds': self.rounds,
            'full_coverage': self.full_coverage,
            'max_extent': self.max_extent,
            'vacuous': self.vacuous,
        }


def _neumaier_add(total: np.ndarray, compensation: np.ndarray, idx: np.ndarray, values: np.ndarray) -> None:
    """In-place compensated accumulation of `values` into total[idx]."""
    current = total[idx]
    updated = current + values
    compensation[idx] += np.where(
        np.abs(current) >= np.abs(values),
        (current - updated) + values,
        (values - updated) + current,
    )
    total[idx] = updated


class BroadcastEngine(LoggingMixin):
    """Runs the cooperative broadcast dynamics for a fixed set of model parameters."""

    def __init__(self, params: ModelParams, block_size: int = 256):
        if block_size < 1:
            raise InvalidParameterError("block_size must be >= 1")
        self.params = params
        self.block_size = block_size

    def _check(self, r: Realization) -> np.ndarray:
        if np.any(r.points[r.source_index] != 0.0):
            raise InvalidParameterError("Realization has no source node at the origin")
        return r.points.reshape(r.node_count, r.dimension)

    def _finish(self, r: Realization, decode_round: np.ndarray, rounds: int) -> BroadcastOutcome:
        decoded = decode_round != NEVER
        reached = int(decoded.sum())
        # Every executed round decodes at least one node
        if rounds > max(r.node_count - 1, 0):
            raise InvariantViolationError(f"rounds={rounds} exceeds node_count-1={r.node_count - 1}")
        return BroadcastOutcome(
            decode_round=decode_round,
            rounds=rounds,
            full_coverage=reached == r.node_count,
            reached_count=reached,
            max_extent=float(r.norms[decoded].max()),
            node_count=r.node_count,
            vacuous=r.node_count == 1,
        )

    def run(self, r: Realization) -> BroadcastOutcome:
        """Incremental fixed point: O(n x decoded) distance evaluations in total."""
        pts = self._check(r)
        n = r.node_count
        alpha, p_t, tau = self.params.alpha, self.params.p_t, self.params.tau

        decode_round = np.full(n, NEVER, dtype=np.int64)
        decode_round[r.source_index] = 0
        power = np.zeros(n)
        compensation = np.zeros(n)
        saturated = np.zeros(n, dtype=bool)

        newly = np.array([r.source_index])
        rounds = 0
        while True:
            undecoded = np.nonzero(decode_round == NEVER)[0]
            if undecoded.size == 0:
                break
            for start in range(0, newly.size, self.block_size):
                block = newly[start:start + self.block_size]
                gains, coincident = pairwise_gains(pts[block], pts[undecoded], alpha)
                _neumaier_add(power, compensation, undecoded, gains.sum(axis=0))
                saturated[undecoded] |= coincident
            received = p_t * (power[undecoded] + compensation[undecoded])
            hits = undecoded[(received >= tau) | saturated[undecoded]]
            if hits.size == 0:
                break
            rounds += 1
            decode_round[hits] = rounds
            newly = hits
            self.logger.debug(f"Round {rounds}: {hits.size} new, {undecoded.size - hits.size} left")
        return self._finish(r, decode_round, rounds)

    def run_oracle(self, r: Realization) -> BroadcastOutcome:
        """Naive fixed point: every round re-evaluates every undecoded node against the whole decoded set."""
        pts = self._check(r)
        decode_round = np.full(r.node_count, NEVER, dtype=np.int64)
        decode_round[r.source_index] = 0
        rounds = 0
        while True:
            decoded_pts = pts[decode_round != NEVER]
            hits = [
                k for k in np.nonzero(decode_round == NEVER)[0]
                if received_power(decoded_pts, pts[k], self.params).reaches(self.params.tau)
            ]
            if not hits:
                break
            rounds += 1
            decode_round[hits] = rounds
        return self._finish(r, decode_round, rounds)


def run_broadcast(r: Realization, params: ModelParams) -> BroadcastOutcome:
    return BroadcastEngine(params).run(r)


def run_broadcast_oracle(r: Realization, params: ModelParams) -> BroadcastOutcome:
    return BroadcastEngine(params).run_oracle(r)


def positive_extent(outcome: BroadcastOutcome, r: Realization) -> float:
    """Largest decoded coordinate on the positive half-line (0 if none beyond the source)."""
    if r.dimension != 1:
        raise InvalidParameterError("positive_extent is defined for 1-D realizations only")
    return max(0.0, float(r.points[outcome.decoded].max()))


def negative_extent(outcome: BroadcastOutcome, r: Realization) -> float:
    """Distance of the leftmost decoded node from the origin (1-D)."""
    if r.dimension != 1:
        raise InvalidParameterError("negative_extent is defined for 1-D realizations only")
    return max(0.0, -float(r.points[outcome.decoded].min()))


def level_sizes(outcome: BroadcastOutcome) -> List[int]:
    """Number of nodes first decoding in each round; index 0 is the source."""
    rounds = outcome.decode_round[outcome.decoded]
    return np.bincount(rounds, minlength=outcome.rounds + 1).tolist()


def is_fixed_point(outcome: BroadcastOutcome, r: Realization, params: ModelParams) -> bool:
    """
    Check the two fixed-point conditions: no undecoded node can decode from the
    final decoded set, and every decoded node could decode from the set decoded
    before its own round.
    """
    pts = r.points.reshape(r.node_count, r.dimension)
    final = pts[outcome.decoded]
    for k in np.nonzero(~outcome.decoded)[0]:
        if received_power(final, pts[k], params).reaches(params.tau):
            return False
    for k in np.nonzero(outcome.decode_round > 0)[0]:
        earlier = pts[(outcome.decode_round != NEVER) & (outcome.decode_round < outcome.decode_round[k])]
        if not received_power(earlier, pts[k], params).reaches(params.tau):
            return False
    return True


def outcome_rows(outcome: BroadcastOutcome, r: Realization) -> List[Dict]:
    """Rows of the replay CSV: node_index, coordinate(s), decode_round (empty if never)."""
    rows = []
    for i in range(r.node_count):
        row: Dict[str, Optional[float]] = {'node_index': i}
        if r.dimension == 1:
            row['x'] = float(r.points[i])
        else:
            row['x'], row['y'] = (float(v) for v in r.points[i])
        round_i = int(outcome.decode_round[i])
        row['decode_round'] = None if round_i == NEVER else round_i
        rows.append(row)
    return rows


def outcome_columns(dimension: int) -> List[str]:
    return ['node_index', 'x', 'decode_round'] if dimension == 1 else ['node_index', 'x', 'y', 'decode_round']
