"""
Seeded Monte Carlo driver: broadcast probability estimates, parameter sweeps,
regime classification and the built-in regime table.

Trial i of a cell always runs on the realization seeded with
derive_trial_seed(master_seed, i), so counts depend only on the spec and never
on the worker count or scheduling.
"""

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .broadcast_engine import run_broadcast, positive_extent
from .network_model import ModelParams, Window, sample
from .storage.csv_handler import CSVStorage
from .storage.json_handler import JSONStorage
from .theory_bounds import regime
from .utils.errors import InvalidParameterError
from .utils.logger import LoggingMixin
from .utils.seeding import SEED_ALGORITHM, derive_trial_seed
from .utils.statistics import wilson_interval

METRICS = ('full_coverage', 'one_sided_extent')
ONE_SIDED_FRACTION = 0.9
RATIO_THRESHOLD = 0.5
PERSISTENCE_FLOOR = 0.05

# Half-widths; in 2-D they are squares of side 10, 20, 30 and 40
DEFAULT_EXTENTS = {1: (25.0, 50.0, 100.0, 200.0), 2: (5.0, 10.0, 15.0, 20.0)}

# (alpha, lambda) per regime-table row. In the alpha > dimension rows a node decodes
# only from neighbours within about unit distance, so full coverage fails once any
# node is cut off and decays over the default windows.
REGIME_GRID = {
    1: ((0.5, 2.0), (1.0, 2.0), (1.5, 1.0)),
    2: ((1.5, 2.0), (2.0, 2.0), (10.0, 2.0)),
}

SWEEP_COLUMNS = ['dim', 'alpha', 'lambda', 'extent', 'trials', 'successes', 'p_hat',
                 'ci_lo', 'ci_hi', 'mean_reach_frac', 'mean_extent', 'seed']


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid of cells (alpha x lambda x extent) with a shared trial count and master seed."""
    dimension: int
    alpha_values: Tuple[float, ...]
    lambda_values: Tuple[float, ...]
    extents: Tuple[float, ...]
    trials: int
    master_seed: int
    metric: str = 'full_coverage'
    p_t: float = 1.0
    tau: float = 1.0
    name: str = 'sweep'

    def __post_init__(self):
        for name in ('alpha_values', 'lambda_values', 'extents'):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise InvalidParameterError(f"SweepSpec.{name} must not be empty")
            object.__setattr__(self, name, values)
        if self.dimension not in (1, 2):
            raise InvalidParameterError(f"dimension must be 1 or 2, got {self.dimension!r}")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if self.master_seed < 0:
            raise InvalidParameterError("master_seed must be >= 0")
        if self.metric not in METRICS:
            raise InvalidParameterError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.metric == 'one_sided_extent' and self.dimension != 1:
            raise InvalidParameterError("The one-sided metric is defined for 1-D sweeps only")

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'SweepSpec':
        """Build from a validated config mapping; keys outside the spec fields are ignored."""
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in config.items() if k in known})

    def cells(self):
        return itertools.product(self.alpha_values, self.lambda_values, self.extents)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in ('alpha_values', 'lambda_values', 'extents'):
            data[name] = list(data[name])
        return data


@dataclass(frozen=True)
class CellResult:
    """Estimate of the success probability for one (alpha, lambda, extent) cell."""
    dimension: int
    alpha: float
    lam: float
    extent: float
    trials: int
    successes: int
    ci_lo: float
    ci_hi: float
    mean_reach_frac: float
    mean_extent: float
    master_seed: int
    seed_algorithm: str = SEED_ALGORITHM

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise InvalidParameterError(f"successes={self.successes} outside [0, {self.trials}]")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        p = self.p_hat
        return float(np.sqrt(p * (1.0 - p) / self.trials))

    def row(self) -> Dict[str, Any]:
        return {
            'dim': self.dimension,
            'alpha': self.alpha,
            'lambda': self.lam,
            'extent': self.extent,
            'trials': self.trials,
            'successes': self.successes,
            'p_hat': self.p_hat,
            'ci_lo': self.ci_lo,
            'ci_hi': self.ci_hi,
            'mean_reach_frac': self.mean_reach_frac,
            'mean_extent': self.mean_extent,
            'seed': self.master_seed,
        }


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: List[CellResult] = field(default_factory=list)
    seed_algorithm: str = SEED_ALGORITHM

    def cell(self, alpha: float, lam: float, extent: float) -> CellResult:
        for c in self.cells:
            if (c.alpha, c.lam, c.extent) == (alpha, lam, extent):
                return c
        raise KeyError((alpha, lam, extent))

    def series(self, alpha: float, lam: float) -> List[CellResult]:
        """Cells of one (alpha, lambda) pair ordered by extent."""
        return sorted((c for c in self.cells if (c.alpha, c.lam) == (alpha, lam)), key=lambda c: c.extent)

    def monotonicity_flags(self) -> List[Tuple[float, float, float]]:
        """
        (alpha, lambda, extent) of cells whose interval lies entirely above the
        interval of the next smaller extent; p_hat should not grow with the window.
        """
        flagged = []
        for alpha, lam in itertools.product(self.spec.alpha_values, self.spec.lambda_values):
            ordered = self.series(alpha, lam)
            for smaller, larger in zip(ordered, ordered[1:]):
                if larger.ci_lo > smaller.ci_hi:
                    flagged.append((alpha, lam, larger.extent))
        return flagged

    def to_dict(self) -> Dict[str, Any]:
        return {
            'spec': self.spec.to_dict(),
            'seed_algorithm': self.seed_algorithm,
            'cells': sweep_rows(self),
        }


def sweep_rows(result: SweepResult) -> List[Dict[str, Any]]:
    return [c.row() for c in result.cells]


def _run_trial(params: ModelParams, window: Window, metric: str, seed: int) -> Tuple[bool, float, float]:
    r = sample(params, window, seed)
    outcome = run_broadcast(r, params)
    if metric == 'one_sided_extent':
        success = positive_extent(outcome, r) >= ONE_SIDED_FRACTION * window.extent
    else:
        success = outcome.full_coverage
    return bool(success), outcome.reach_fraction, outcome.max_extent


def _run_trial_packed(args) -> Tuple[bool, float, float]:
    return _run_trial(*args)


class MonteCarloRunner(LoggingMixin):
    """Runs the trials of a cell serially or on a process pool; results are kept in trial order."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise InvalidParameterError("workers must be >= 1")
        self.workers = workers

    def run(self, params: ModelParams, window: Window, metric: str,
            trials: int, master_seed: int) -> List[Tuple[bool, float, float]]:
        jobs = [(params, window, metric, derive_trial_seed(master_seed, i)) for i in range(trials)]
        if self.workers == 1 or trials == 1:
            return [_run_trial_packed(job) for job in jobs]
        chunksize = max(1, trials // (4 * self.workers))
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            # map yields in submission order, i.e. by trial index
            return list(pool.map(_run_trial_packed, jobs, chunksize=chunksize))

    def estimate(self, params: ModelParams, window: Window, trials: int, master_seed: int,
                 metric: str = 'full_coverage') -> CellResult:
        if trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if metric not in METRICS:
            raise InvalidParameterError(f"metric must be one of {METRICS}, got {metric!r}")
        if metric == 'one_sided_extent' and window.dimension != 1:
            raise InvalidParameterError("The one-sided metric is defined for 1-D windows only")
        start = time.time()
        outcomes = self.run(params, window, metric, trials, master_seed)
        successes = sum(ok for ok, _, _ in outcomes)
        lo, hi = wilson_interval(successes, trials)
        cell = CellResult(
            dimension=window.dimension,
            alpha=float(params.alpha),
            lam=float(params.lam),
            extent=float(window.extent),
            trials=trials,
            successes=successes,
            ci_lo=lo,
            ci_hi=hi,
            mean_reach_frac=float(np.mean([frac for _, frac, _ in outcomes])),
            mean_extent=float(np.mean([ext for _, _, ext in outcomes])),
            master_seed=master_seed,
        )
        self.logger.info(
            f"Cell dim={cell.dimension} alpha={cell.alpha} lambda={cell.lam} extent={cell.extent}: "
            f"{successes}/{trials} (p_hat={cell.p_hat:.4f}, CI [{lo:.4f}, {hi:.4f}]) "
            f"in {time.time() - start:.1f}s"
        )
        return cell


def estimate_broadcast_prob(params: ModelParams, window: Window, trials: int, master_seed: int,
                            metric: str = 'full_coverage', workers: int = 1) -> CellResult:
    """Fraction of `trials` seeded realizations on which the broadcast succeeds, with a Wilson 95% interval."""
    return MonteCarloRunner(workers).estimate(params, window, trials, master_seed, metric)


def run_sweep(spec: SweepSpec, output_dir: Optional[str] = None, output_format: str = 'csv',
              workers: int = 1, progress: Optional[Callable[[CellResult], None]] = None) -> SweepResult:
    """
    Estimate every cell of the grid in canonical (alpha, lambda, extent) order.
    Writes the result through the CSV or JSON storage handler when
    `output_dir` is given.
    """
    runner = MonteCarloRunner(workers)
    result = SweepResult(spec=spec)
    runner.logger.info(f"Sweep '{spec.name}': {len(spec.alpha_values) * len(spec.lambda_values) * len(spec.extents)} "
                       f"cells x {spec.trials} trials (seed={spec.master_seed}, workers={workers})")
    for alpha, lam, extent in spec.cells():
        params = ModelParams(alpha=alpha, lam=lam, p_t=spec.p_t, tau=spec.tau)
        cell = runner.estimate(params, Window(spec.dimension, extent), spec.trials, spec.master_seed, spec.metric)
        result.cells.append(cell)
        if progress is not None:
            progress(cell)
    for alpha, lam, extent in result.monotonicity_flags():
        runner.logger.warning(f"p_hat grows with the window beyond CI noise at alpha={alpha}, "
                              f"lambda={lam}, extent={extent}")
    if output_dir is not None:
        save_sweep(result, output_dir, output_format)
    return result


def save_sweep(result: SweepResult, output_dir: str, output_format: str = 'csv',
               filename: Optional[str] = None) -> str:
    config = {'output_dir': output_dir, 'name': result.spec.name}
    if output_format == 'csv':
        return CSVStorage(config).save(sweep_rows(result), filename, columns=SWEEP_COLUMNS)
    if output_format == 'json':
        return JSONStorage(config).save(result.to_dict(), filename)
    raise InvalidParameterError(f"output_format must be 'csv' or 'json', got {output_format!r}")


@dataclass(frozen=True)
class RegimeRow:
    dimension: int
    alpha: float
    lam: float
    label: str
    p_hats: Tuple[float, ...]
    extents: Tuple[float, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dimension,
            'alpha': self.alpha,
            'lambda': self.lam,
            'label': self.label,
            'p_hats': list(self.p_hats),
            'extents': list(self.extents),
        }


def _label(series: Sequence[CellResult], ratio_threshold: float, persistence_floor: float) -> str:
    if all(c.successes == 0 for c in series):
        return 'vanishing'
    first, last = series[0], series[-1]
    # Successive p_hat may wobble within the previous interval and still count as non-increasing
    non_increasing = all(b.p_hat <= a.ci_hi for a, b in zip(series, series[1:]))
    if last.p_hat < ratio_threshold * first.p_hat and non_increasing:
        return 'vanishing'
    second_last = series[-2]
    overlap = second_last.ci_lo <= last.ci_hi and last.ci_lo <= second_last.ci_hi
    if overlap and last.p_hat > persistence_floor:
        return 'persistent'
    return 'inconclusive'


def classify_regimes(result: SweepResult, ratio_threshold: float = RATIO_THRESHOLD,
                     persistence_floor: float = PERSISTENCE_FLOOR) -> List[RegimeRow]:
    """
    Label every (alpha, lambda) of the sweep 'vanishing', 'persistent' or
    'inconclusive' from the trend of p_hat over the window extents.
    """
    if len(result.spec.extents) < 3:
        raise InvalidParameterError("Regime classification needs at least three window extents")
    rows = []
    for alpha, lam in itertools.product(result.spec.alpha_values, result.spec.lambda_values):
        series = result.series(alpha, lam)
        rows.append(RegimeRow(
            dimension=result.spec.dimension,
            alpha=alpha,
            lam=lam,
            label=_label(series, ratio_threshold, persistence_floor),
            p_hats=tuple(c.p_hat for c in series),
            extents=tuple(c.extent for c in series),
        ))
    return rows


# --- Regime table ---

def expected_label(dimension: int, lam: float, alpha: float) -> str:
    """Label the proven regime predicts: 'persistent' for 0 < P(B) < 1, 'vanishing' for P(B) = 0."""
    return {'positive': 'persistent', 'zero': 'vanishing'}.get(regime(dimension, lam, alpha), 'inconclusive')


def default_regime_specs(dimension: int, trials: int, seed: int) -> List[SweepSpec]:
    """One sweep per regime-table row over the default window extents."""
    return [
        SweepSpec(
            dimension=dimension,
            alpha_values=(alpha,),
            lambda_values=(lam,),
            extents=DEFAULT_EXTENTS[dimension],
            trials=trials,
            master_seed=seed,
            name=f"regimes_{dimension}d_alpha{alpha:g}_lambda{lam:g}",
        )
        for alpha, lam in REGIME_GRID[dimension]
    ]


@dataclass(frozen=True)
class RegimeCheck:
    regime: RegimeRow
    expected: str

    @property
    def matches(self) -> bool:
        return self.regime.label == self.expected

    def to_dict(self) -> Dict[str, Any]:
        data = self.regime.to_dict()
        data['expected'] = self.expected
        data['matches'] = self.matches
        return data


def run_regime_table(trials: int, seed: int, workers: int = 1, dimensions: Sequence[int] = (1, 2),
                     progress: Optional[Callable[[CellResult], None]] = None) -> List[RegimeCheck]:
    rows = []
    for dimension in dimensions:
        for spec in default_regime_specs(dimension, trials, seed):
            result = run_sweep(spec, workers=workers, progress=progress)
            for regime_row in classify_regimes(result):
                rows.append(RegimeCheck(
                    regime=regime_row,
                    expected=expected_label(dimension, regime_row.lam, regime_row.alpha),
                ))
    return rows
