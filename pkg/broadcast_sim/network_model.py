"""
Extended Poisson networks on symmetric 1-D and 2-D windows.

A realization always carries a deterministic source node pinned at the origin
(Palm conditioning); the remaining nodes form a homogeneous Poisson process
restricted to the window. Points are stored in canonical order (sorted in 1-D,
lexicographic in 2-D) so every downstream accumulation runs in the same order.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .utils.errors import InvalidParameterError, StorageError

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2)


@dataclass(frozen=True)
class ModelParams:
    """Physical model: path loss exponent, node density, transmit power and decode threshold."""
    alpha: float
    lam: float
    p_t: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ('alpha', 'lam', 'p_t', 'tau'):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise InvalidParameterError(f"ModelParams.{name} must be a finite number, got {value!r}")
        if self.alpha <= 0:
            raise InvalidParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.lam < 0:
            raise InvalidParameterError(f"lambda must be >= 0, got {self.lam}")
        if self.p_t <= 0 or self.tau <= 0:
            raise InvalidParameterError(f"p_t and tau must be > 0, got p_t={self.p_t}, tau={self.tau}")
        try:
            radius = (self.p_t / self.tau) ** (1.0 / self.alpha)
        except OverflowError:
            radius = math.inf
        if not (math.isfinite(radius) and radius > 0):
            raise InvalidParameterError(
                f"Transmission radius (p_t/tau)^(1/alpha) is not finite and positive for {self}"
            )

    @property
    def radius(self) -> float:
        """Transmission radius r with p_t * r^-alpha = tau."""
        return (self.p_t / self.tau) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class Window:
    """Symmetric observation window: [-extent, extent] in 1-D, its square in 2-D."""
    dimension: int
    extent: float

    def __post_init__(self):
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise InvalidParameterError(f"Window dimension must be 1 or 2, got {self.dimension!r}")
        if not (isinstance(self.extent, (int, float, np.floating, np.integer))
                and math.isfinite(self.extent) and self.extent > 0):
            raise InvalidParameterError(f"Window extent must be a finite number > 0, got {self.extent!r}")

    @property
    def side(self) -> float:
        return 2.0 * self.extent

    @property
    def measure(self) -> float:
        """Length (1-D) or area (2-D) of the window."""
        return self.side ** self.dimension

    def contains(self, points: np.ndarray) -> bool:
        return bool(np.all(np.abs(points) <= self.extent))


@dataclass(frozen=True, eq=False)
class Realization:
    """
    A sampled node set. `points` has shape (n,) in 1-D and (n, 2) in 2-D and is
    read-only; `points[source_index]` is exactly the origin.
    """
    points: np.ndarray
    source_index: int
    seed: Optional[int] = None
    window: Optional[Window] = None
    lam: float = 0.0
    dimension: int = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            dim = 1
        elif pts.ndim == 2 and pts.shape[1] == 2:
            dim = 2
        else:
            raise InvalidParameterError(f"points must have shape (n,) or (n, 2), got {pts.shape}")
        if not 0 <= self.source_index < len(pts):
            raise InvalidParameterError(f"source_index {self.source_index} out of range for {len(pts)} nodes")
        if np.any(pts[self.source_index] != 0.0):
            raise InvalidParameterError("The source node must sit exactly at the origin")
        if self.window is not None:
            if self.window.dimension != dim:
                raise InvalidParameterError("Window dimension does not match the point dimension")
            if not self.window.contains(pts):
                raise InvalidParameterError("Realization has points outside its window")
        pts.setflags(write=False)
        object.__setattr__(self, 'points', pts)
        object.__setattr__(self, 'dimension', dim)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def node_count(self) -> int:
        return len(self.points)

    @property
    def norms(self) -> np.ndarray:
        """Distance of every node from the origin."""
        if self.dimension == 1:
            return np.abs(self.points)
        return np.hypot(self.points[:, 0], self.points[:, 1])

    @classmethod
    def from_points(
        cls,
        points: Union[Sequence[float], Sequence[Sequence[float]], np.ndarray],
        window: Optional[Window] = None,
        lam: float = 0.0,
        seed: Optional[int] = None,
    ) -> 'Realization':
        """Build a realization from explicit coordinates, adding the origin if it is missing."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 2 and pts.shape[1] == 1:
            pts = pts[:, 0]
        if pts.size == 0:
            dim = window.dimension if window is not None else 1
            pts = np.zeros((0,) if dim == 1 else (0, 2))
        at_origin = np.all((pts[:, None] if pts.ndim == 1 else pts) == 0.0, axis=1)
        if not at_origin.any():
            origin = np.zeros((1,) + pts.shape[1:])
            pts = np.concatenate([origin, pts])
            at_origin = np.concatenate([[True], np.zeros(len(pts) - 1, dtype=bool)])
        # The first origin point is the source; canonical_order keeps it first among ties
        first = int(np.argmax(at_origin))
        reordered = np.concatenate([pts[first:first + 1], np.delete(pts, first, axis=0)])
        ordered, source_index = _canonical_order(reordered)
        return cls(points=ordered, source_index=source_index, seed=seed, window=window, lam=lam)

    # --- Text serialization: '# dim=<d> lambda=<v> seed=<v>' then one node per line ---

    def dumps(self) -> str:
        lines = [f"# dim={self.dimension} lambda={self.lam!r} seed={self.seed}"]
        extent = self.window.extent if self.window is not None else None
        lines.append(f"# extent={extent!r} source_index={self.source_index}")
        if self.dimension == 1:
            lines.extend(repr(float(x)) for x in self.points)
        else:
            lines.extend(f"{float(x)!r} {float(y)!r}" for x, y in self.points)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> 'Realization':
        header: dict = {}
        rows: List[List[float]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith('#'):
                for token in line.lstrip('#').split():
                    key, sep, value = token.partition('=')
                    if sep:
                        header[key] = value
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError:
                raise InvalidParameterError(f"Line {lineno}: cannot parse coordinates from {raw!r}") from None
        if 'dim' not in header:
            raise InvalidParameterError("Realization text lacks the '# dim=...' header")
        try:
            dim = int(header['dim'])
            lam = float(header.get('lambda', 0.0))
            seed = None if header.get('seed', 'None') == 'None' else int(header['seed'])
            extent = header.get('extent', 'None')
            window = None if extent == 'None' else Window(dim, float(extent))
        except ValueError as e:
            raise InvalidParameterError(f"Malformed realization header {header}: {e}") from None
        if any(len(row) != dim for row in rows):
            raise InvalidParameterError(f"Every node line must hold {dim} coordinate(s)")
        pts = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
        if dim == 1:
            pts = pts[:, 0]
        if 'source_index' in header:
            return cls(points=pts, source_index=int(header['source_index']), seed=seed, window=window, lam=lam)
        return cls.from_points(pts, window=window, lam=lam, seed=seed)


def _canonical_order(points: np.ndarray):
    """Stable canonical sort. Returns (sorted points, new index of the row that was at position 0)."""
    if points.ndim == 1:
        order = np.argsort(points, kind='stable')
    else:
        order = np.lexsort((points[:, 1], points[:, 0]))
    source_index = int(np.nonzero(order == 0)[0][0])
    return points[order], source_index


def sample(params: ModelParams, window: Window, seed: int) -> Realization:
    """
    Draw a Poisson(lam * |window|) number of uniform nodes on the window and pin
    the source at the origin. Deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    count = int(rng.poisson(params.lam * window.measure))
    shape = (count,) if window.dimension == 1 else (count, 2)
    nodes = rng.uniform(-window.extent, window.extent, size=shape)
    origin = np.zeros((1,) + shape[1:])
    ordered, source_index = _canonical_order(np.concatenate([origin, nodes]))
    logger.debug(f"Sampled {count} nodes (dim={window.dimension}, extent={window.extent}, seed={seed})")
    return Realization(points=ordered, source_index=source_index, seed=seed, window=window, lam=params.lam)


def gaps_1d(r: Realization) -> np.ndarray:
    """Consecutive spacings of a 1-D realization, in coordinate order."""
    if r.dimension != 1:
        raise InvalidParameterError("gaps_1d requires a 1-D realization")
    return np.diff(r.points)


def _tree(r: Realization) -> cKDTree:
    return cKDTree(r.points.reshape(len(r.points), r.dimension))


def nearest_neighbor_dist(r: Realization, i: int) -> float:
    """Distance from node i to its closest other node."""
    if r.node_count < 2:
        raise InvalidParameterError("nearest_neighbor_dist needs at least two nodes")
    if not 0 <= i < r.node_count:
        raise InvalidParameterError(f"Node index {i} out of range")
    query = r.points[i].reshape(r.dimension)
    distances, _ = _tree(r).query(query, k=2)
    # k=2 because the closest hit is node i itself
    return float(distances[1])


def isolated_nodes(r: Realization, radius: float) -> List[int]:
    """Indices of nodes with no other node within `radius`."""
    if radius < 0:
        raise InvalidParameterError("radius must be >= 0")
    if r.node_count < 2:
        return list(range(r.node_count))
    distances, _ = _tree(r).query(r.points.reshape(len(r.points), r.dimension), k=2)
    return [int(i) for i in np.nonzero(distances[:, 1] > radius)[0]]


def save_realization(r: Realization, path: Union[str, Path]) -> str:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(r.dumps(), encoding='utf-8')
    except OSError as e:
        raise StorageError(f"Failed to write realization to {path}: {e}", path=str(path)) from e
    logger.info(f"Realization with {r.node_count} nodes saved to {path}")
    return str(path)


def load_realization(path: Union[str, Path]) -> Realization:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise StorageError(f"Failed to read realization from {path}: {e}", path=str(path)) from e
    return Realization.loads(text)
