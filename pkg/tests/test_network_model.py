import math

import numpy as np
import pytest
from scipy.stats import kstest

from broadcast_sim.network_model import (
    ModelParams, Realization, Window, gaps_1d, isolated_nodes, load_realization,
    nearest_neighbor_dist, sample, save_realization,
)
from broadcast_sim.utils.errors import InvalidParameterError, StorageError


class TestModelParams:
    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0.0, lam=1.0),
        dict(alpha=-1.0, lam=1.0),
        dict(alpha=2.0, lam=-0.1),
        dict(alpha=2.0, lam=1.0, p_t=0.0),
        dict(alpha=2.0, lam=1.0, tau=-1.0),
        dict(alpha=float('nan'), lam=1.0),
        dict(alpha=2.0, lam=float('inf')),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            ModelParams(**kwargs)

    def test_rejects_overflowing_radius(self):
        with pytest.raises(InvalidParameterError):
            ModelParams(alpha=1e-300, lam=1.0, p_t=2.0, tau=1.0)

    def test_radius(self):
        assert ModelParams(alpha=2.0, lam=1.0, p_t=4.0).radius == pytest.approx(2.0)
        assert ModelParams(alpha=3.0, lam=1.0, tau=8.0).radius == pytest.approx(0.5)


class TestWindow:
    def test_measure(self):
        assert Window(1, 50.0).measure == 100.0
        assert Window(2, 5.0).measure == 100.0

    @pytest.mark.parametrize("dimension, extent", [(3, 1.0), (0, 1.0), (1, 0.0), (2, -1.0), (1, math.inf)])
    def test_rejects_invalid(self, dimension, extent):
        with pytest.raises(InvalidParameterError):
            Window(dimension, extent)


class TestSample:
    def test_zero_density_gives_source_only(self):
        r = sample(ModelParams(alpha=2.0, lam=0.0), Window(1, 100.0), seed=3)
        assert r.node_count == 1
        assert r.points[r.source_index] == 0.0

    def test_deterministic(self):
        params, window = ModelParams(alpha=2.0, lam=2.0), Window(2, 5.0)
        a, b = sample(params, window, 11), sample(params, window, 11)
        np.testing.assert_array_equal(a.points, b.points)
        assert a.source_index == b.source_index
        assert a.dumps() == b.dumps()

    def test_different_seeds_differ(self):
        params, window = ModelParams(alpha=2.0, lam=2.0), Window(1, 50.0)
        assert sample(params, window, 1).dumps() != sample(params, window, 2).dumps()

    @pytest.mark.parametrize("dimension, extent", [(1, 20.0), (2, 4.0)])
    def test_source_at_origin_and_points_in_window(self, dimension, extent):
        params, window = ModelParams(alpha=2.0, lam=3.0), Window(dimension, extent)
        for seed in range(20):
            r = sample(params, window, seed)
            assert np.all(r.points[r.source_index] == 0.0)
            assert np.all(np.abs(r.points) <= extent)
            assert r.window == window

    def test_canonical_order(self):
        r1 = sample(ModelParams(alpha=2.0, lam=2.0), Window(1, 10.0), 5)
        assert np.all(np.diff(r1.points) >= 0)
        r2 = sample(ModelParams(alpha=2.0, lam=2.0), Window(2, 5.0), 5)
        order = np.lexsort((r2.points[:, 1], r2.points[:, 0]))
        np.testing.assert_array_equal(order, np.arange(r2.node_count))

    def test_points_are_read_only(self):
        r = sample(ModelParams(alpha=2.0, lam=2.0), Window(1, 10.0), 5)
        with pytest.raises(ValueError):
            r.points[0] = 1.0

    def test_counting_law(self):
        params, window = ModelParams(alpha=2.0, lam=2.0), Window(1, 50.0)
        counts = np.array([sample(params, window, seed).node_count - 1 for seed in range(2000)])
        expected = 200.0
        assert abs(counts.mean() - expected) < 3 * math.sqrt(expected / len(counts))
        assert counts.var(ddof=1) == pytest.approx(expected, rel=0.15)

    def test_gaps_are_exponential(self):
        params, window = ModelParams(alpha=2.0, lam=1.0), Window(1, 50.0)
        pooled = []
        seed = 0
        while sum(len(g) for g in pooled) < 10_000:
            pooled.append(gaps_1d(sample(params, window, seed)))
            seed += 1
        statistic = kstest(np.concatenate(pooled), 'expon').statistic
        assert statistic < 0.05


class TestGeometry:
    def test_gaps_1d(self):
        r = Realization.from_points([0.0, 0.5, 2.5, 3.0])
        np.testing.assert_allclose(gaps_1d(r), [0.5, 2.0, 0.5])

    def test_gaps_single_node(self):
        assert gaps_1d(Realization.from_points([])).size == 0

    def test_gaps_rejects_2d(self):
        with pytest.raises(InvalidParameterError):
            gaps_1d(Realization.from_points([[0.0, 0.0], [1.0, 1.0]]))

    def test_nearest_neighbor_dist(self):
        r = Realization.from_points([0.0, 3.0])
        assert nearest_neighbor_dist(r, 0) == 3.0
        assert nearest_neighbor_dist(r, 1) == 3.0
        r = Realization.from_points([0.0, 1.0, 1.5])
        assert nearest_neighbor_dist(r, 2) == pytest.approx(0.5)
        r = Realization.from_points([[0.0, 0.0], [3.0, 4.0]])
        assert nearest_neighbor_dist(r, 1) == pytest.approx(5.0)

    def test_nearest_neighbor_needs_two_nodes(self):
        with pytest.raises(InvalidParameterError):
            nearest_neighbor_dist(Realization.from_points([]), 0)

    def test_isolated_nodes(self):
        r = Realization.from_points([0.0, 0.5, 3.0])
        assert isolated_nodes(r, 1.0) == [2]
        assert isolated_nodes(r, 3.0) == []


class TestRealization:
    def test_from_points_adds_origin(self):
        r = Realization.from_points([2.0, -1.0])
        np.testing.assert_array_equal(r.points, [-1.0, 0.0, 2.0])
        assert r.source_index == 1

    def test_from_points_keeps_duplicates(self):
        r = Realization.from_points([0.0, 0.0, 1.0])
        assert r.node_count == 3
        assert r.points[r.source_index] == 0.0

    def test_rejects_source_off_origin(self):
        with pytest.raises(InvalidParameterError):
            Realization(points=np.array([0.5, 1.0]), source_index=0)

    def test_rejects_points_outside_window(self):
        with pytest.raises(InvalidParameterError):
            Realization.from_points([0.0, 5.0], window=Window(1, 2.0))

    def test_text_round_trip_is_exact(self):
        r = sample(ModelParams(alpha=2.0, lam=1.5), Window(2, 3.0), 42)
        back = Realization.loads(r.dumps())
        np.testing.assert_array_equal(back.points, r.points)
        assert back.source_index == r.source_index
        assert back.seed == 42
        assert back.lam == 1.5
        assert back.window == r.window

    def test_header_format(self):
        r = Realization.from_points([0.0, 1.0], lam=2.0, seed=7)
        assert r.dumps().splitlines()[0] == "# dim=1 lambda=2.0 seed=7"

    def test_loads_without_source_index_line(self):
        r = Realization.loads("# dim=1 lambda=1.0 seed=None\n1.5\n-0.5\n")
        np.testing.assert_array_equal(r.points, [-0.5, 0.0, 1.5])

    @pytest.mark.parametrize("text", [
        "0.0\n1.0\n",
        "# dim=1 lambda=1.0 seed=1\n0.0 1.0\n",
        "# dim=2 lambda=1.0 seed=1\n0.0 abc\n",
    ])
    def test_loads_rejects_malformed(self, text):
        with pytest.raises(InvalidParameterError):
            Realization.loads(text)

    def test_save_and_load(self, tmp_path):
        r = sample(ModelParams(alpha=2.0, lam=2.0), Window(1, 5.0), 9)
        path = save_realization(r, tmp_path / "replay" / "r.txt")
        back = load_realization(path)
        np.testing.assert_array_equal(back.points, r.points)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(StorageError) as info:
            load_realization(tmp_path / "missing.txt")
        assert info.value.path.endswith("missing.txt")
