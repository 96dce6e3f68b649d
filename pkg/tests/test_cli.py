import json
import logging
from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from broadcast_sim.network_model import load_realization
from broadcast_sim.utils.logger import LOG_DIR_ENV
from broadcast_sim.utils.seeding import SEED_ALGORITHM
from interfaces.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, app, main

runner = CliRunner()


@pytest.fixture(autouse=True)
def restore_root_logging(tmp_path_factory, monkeypatch):
    """The CLI callback reconfigures the root logger; put the test harness handlers back."""
    monkeypatch.setenv(LOG_DIR_ENV, str(tmp_path_factory.mktemp('logs')))
    root = logging.getLogger()
    saved_handlers, saved_level = root.handlers[:], root.level
    yield
    for handler in root.handlers[:]:
        if handler not in saved_handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in saved_handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(saved_level)


def _data_lines(output):
    return [line for line in output.splitlines() if line and not line.startswith('#')]


def _last_json(output):
    return json.loads(output.strip().splitlines()[-1])


class TestSimulate:
    def test_empty_process(self):
        result = runner.invoke(app, ['simulate', '--dim', '1', '--alpha', '2', '--lambda', '0',
                                     '--extent', '10', '--trials', '20', '--seed', '4'])
        assert result.exit_code == EXIT_OK, result.output
        row = _last_json(result.output)
        assert row['p_hat'] == 1.0
        assert row['successes'] == 20
        assert row['seed'] == 4
        assert row['seed_algorithm'] == SEED_ALGORITHM

    def test_saves_replay_files(self, tmp_path):
        realization_path = tmp_path / 'r.txt'
        outcome_path = tmp_path / 'outcome.csv'
        result = runner.invoke(app, ['simulate', '--dim', '1', '--alpha', '1', '--lambda', '1',
                                     '--extent', '5', '--trials', '3',
                                     '--save-realization', str(realization_path),
                                     '--save-outcome', str(outcome_path)])
        assert result.exit_code == EXIT_OK, result.output
        r = load_realization(realization_path)
        lines = outcome_path.read_text().splitlines()
        assert lines[0] == 'node_index,x,decode_round'
        assert len(lines) == r.node_count + 1

    def test_invalid_alpha(self):
        result = runner.invoke(app, ['simulate', '--dim', '1', '--alpha', '-1', '--lambda', '1',
                                     '--extent', '10'])
        assert result.exit_code == EXIT_INVALID

    def test_one_sided_in_plane_is_invalid(self):
        result = runner.invoke(app, ['simulate', '--dim', '2', '--alpha', '1', '--lambda', '1',
                                     '--extent', '3', '--metric', 'onesided'])
        assert result.exit_code == EXIT_INVALID


class TestBounds:
    def test_line_bound(self):
        result = runner.invoke(app, ['bounds', '--dim', '1', '--alpha', '1', '--lambda', '2'])
        assert result.exit_code == EXIT_OK, result.output
        report = _last_json(result.output)
        assert report['N'] == 2
        assert report['delta'] == pytest.approx(0.25)
        assert 0.0 < report['total'] < 1.0

    def test_normalizes_transmit_power(self):
        result = runner.invoke(app, ['bounds', '--dim', '1', '--alpha', '1', '--lambda', '1',
                                     '--p-t', '4'])
        assert result.exit_code == EXIT_OK, result.output
        assert _last_json(result.output)['lambda'] == pytest.approx(4.0)

    def test_inapplicable(self):
        result = runner.invoke(app, ['bounds', '--dim', '1', '--alpha', '1', '--lambda', '1'])
        assert result.exit_code == EXIT_INVALID


def test_continuum_csv():
    result = runner.invoke(app, ['continuum', '--dim', '1', '--alpha', '2', '--rho', '1', '--steps', '3'])
    assert result.exit_code == EXIT_OK, result.output
    lines = _data_lines(result.output)
    assert lines[0] == 'step,R,increment'
    assert len(lines) == 5
    assert float(lines[2].split(',')[1]) == pytest.approx((1 + 5 ** 0.5) / 2, rel=1e-10)


@pytest.mark.parametrize("alpha", ["2", "3"])
def test_continuum_plane_at_divergent_rim(alpha):
    result = runner.invoke(app, ['continuum', '--dim', '2', '--alpha', alpha, '--rho', '1', '--steps', '3'])
    assert result.exit_code == EXIT_OK, result.output
    assert len(_data_lines(result.output)) == 5


def test_continuum_reports_escape():
    result = runner.invoke(app, ['continuum', '--dim', '1', '--alpha', '0.5', '--rho', '1', '--steps', '20'])
    assert result.exit_code == EXIT_OK, result.output
    assert len(_data_lines(result.output)) < 22
    assert 'escaped float range' in result.output


class TestSweep:
    def _spec(self, tmp_path, **fields):
        spec = {'name': 'cli_sweep', 'dimension': 1, 'alpha_values': [1.0], 'lambda_values': [2.0],
                'extents': [3, 6, 9], 'trials': 10, 'master_seed': 2}
        spec.update(fields)
        path = tmp_path / 'spec.yaml'
        path.write_text(yaml.safe_dump(spec))
        return path

    def test_runs_and_writes(self, tmp_path):
        out_dir = tmp_path / 'out'
        result = runner.invoke(app, ['sweep', '--spec', str(self._spec(tmp_path)),
                                     '--output-dir', str(out_dir), '--format', 'json'])
        assert result.exit_code == EXIT_OK, result.output
        assert any(line.startswith('dim,alpha,lambda,extent') for line in result.output.splitlines())
        written = list(out_dir.glob('cli_sweep_*.json'))
        assert len(written) == 1
        assert len(json.loads(written[0].read_text())['cells']) == 3

    def test_missing_spec(self, tmp_path):
        result = runner.invoke(app, ['sweep', '--spec', str(tmp_path / 'missing.yaml')])
        assert result.exit_code == EXIT_IO

    def test_invalid_spec(self, tmp_path):
        result = runner.invoke(app, ['sweep', '--spec', str(self._spec(tmp_path, trials=0))])
        assert result.exit_code == EXIT_INVALID


def test_generate_spec(tmp_path):
    result = runner.invoke(app, ['generate-spec', '--output-dir', str(tmp_path), '--trials', '5'])
    assert result.exit_code == EXIT_OK, result.output
    assert sorted(p.name for p in Path(tmp_path).iterdir()) == ['sample_regimes_1d.yaml', 'sample_regimes_2d.yaml']


@pytest.mark.parametrize("command", ["table1", "regime-table"])
def test_table1_rejects_bad_dimension(command):
    result = runner.invoke(app, [command, '--dim', '3', '--trials', '1'])
    assert result.exit_code == EXIT_INVALID


class TestMain:
    def test_success(self, capsys):
        assert main(['bounds', '--dim', '1', '--alpha', '1', '--lambda', '2']) == EXIT_OK
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])['N'] == 2

    def test_usage_error(self):
        assert main(['bounds', '--dim', '5', '--alpha', '1', '--lambda', '2']) == EXIT_INVALID
        assert main(['no-such-command']) == EXIT_INVALID

    def test_inapplicable_bound(self):
        assert main(['bounds', '--dim', '1', '--alpha', '1', '--lambda', '1']) == EXIT_INVALID

    def test_table1_is_registered(self):
        assert main(['table1', '--dim', '3', '--trials', '1']) == EXIT_INVALID


def test_log_lines_carry_run_context():
    result = runner.invoke(app, ['--log-level', 'info', 'continuum', '--dim', '1', '--alpha', '2',
                                 '--rho', '1', '--steps', '2'])
    assert result.exit_code == EXIT_OK, result.output
    assert '[command=continuum]' in result.output


def test_unknown_log_level_is_usage_error():
    assert main(['--log-level', 'chatty', 'continuum', '--dim', '1', '--alpha', '2', '--rho', '1']) == EXIT_INVALID
