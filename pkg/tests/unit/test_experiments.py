"""
Unit tests for experiment runners with small configurations.
"""
import math

import pytest

from liouville.config import THREADS_ENV, build_config
from liouville.errors import InsufficientModesError
from liouville.experiments import make_mapper, replicate_map, run_command
from liouville.gff import sample_gff
from liouville.models import Command
from liouville.results import RunOutput

FAST = {"n_modes": 256, "n_replicates": 3, "max_time": 0.02}


def run(command, **values):
    output = RunOutput()
    run_command(build_config(command, cli_values={**FAST, **values}), output)
    return output


class TestReplicateMap:
    """Test ordered replicate execution."""

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_order_preserved(self, monkeypatch, threads):
        """Results come back in replicate order whatever the thread count."""
        monkeypatch.setenv(THREADS_ENV, threads)
        assert list(replicate_map(lambda i: i * i, 10, "squares")) == [i * i for i in range(10)]

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_results_before_failure_are_delivered(self, monkeypatch, threads):
        """Replicates before a failing one reach the caller before the error does."""
        monkeypatch.setenv(THREADS_ENV, threads)

        def square_or_fail(i):
            if i == 3:
                raise InsufficientModesError("replicate 3")
            return i * i

        seen = []
        with pytest.raises(InsufficientModesError):
            for value in replicate_map(square_or_fail, 6, "squares"):
                seen.append(value)
        assert seen == [0, 1, 4]

    def test_mapper_reports_each_result(self):
        """make_mapper hands every result to the callback in order."""
        seen = []
        mapper = make_mapper("squares", lambda i, value: seen.append((i, value)))
        assert list(mapper(lambda x: x * x, [3, 1, 2])) == [9, 1, 4]
        assert seen == [(0, 9), (1, 1), (2, 4)]


class TestRunners:
    """Test each command's tables and summary."""

    def test_field_stats(self):
        """One row per replicate plus variance diagnostics."""
        output = run(Command.FIELD_STATS, export_grid=True, grid_n=16, k=4)
        assert len(output.tables["results"].rows) == 3
        assert output.summary["truncation_warning"] is True
        assert len(output.tables["grid"].rows) == 196

    def test_clock_mean_gamma_zero(self):
        """gamma = 0 reads mu(t) = t and passes the identity check."""
        output = run(Command.CLOCK_MEAN, gamma=0.0, k=4, horizon=0.01, export_series=True)
        assert output.summary["gamma_zero_identity"] == "pass"
        assert output.summary["mean_clock"] == pytest.approx(0.01)
        assert {"path", "clock", "trajectory"} <= set(output.tables)

    def test_converge(self):
        """One row per replicate and level pair."""
        output = run(Command.CONVERGE, k_min=4, k_max=5, dt=2.0 ** -14, max_time=0.01, horizon=0.005)
        assert len(output.tables["results"].rows) == 3
        assert output.summary["levels"] == [4]

    def test_positivity(self):
        """Every clock total is positive."""
        output = run(Command.POSITIVITY, gammas=[0.5, 1.5], k=4)
        assert len(output.tables["results"].rows) == 6
        assert output.summary["gammas"]["1.5"]["fraction_positive"] == 1.0

    def test_conformal_check(self):
        """One KS row per angle."""
        output = run(Command.CONFORMAL_CHECK, k=4, theta=[math.pi / 2])
        assert len(output.tables["results"].rows) == 1
        assert len(output.tables["samples"].rows) == 3

    def test_thick_dim(self):
        """Dimension estimates lie in [0, 1]."""
        output = run(Command.THICK_DIM, k=4, dt=2.0 ** -12, eta=2.0, n_range=[6, 8], max_time=0.1)
        assert len(output.tables["dimensions"].rows) == 3
        assert output.summary["estimates_in_unit_interval"]

    def test_thick_dim_tail_reference(self):
        """Selection counts are compared with the Gaussian-tail mean, not the bare power."""
        output = run(Command.THICK_DIM, k=4, dt=2.0 ** -12, eta=2.0, n_range=[6, 8], max_time=0.1)
        counts = output.summary["selection_counts"]
        assert counts
        for entry in counts.values():
            assert set(entry) == {"mean_selected", "tail_reference", "ratio",
                                  "within_factor_3", "power_reference"}
            assert entry["tail_reference"] >= 0.0
            if entry["tail_reference"] > 0.0:
                assert entry["ratio"] == pytest.approx(entry["mean_selected"] / entry["tail_reference"])

    def test_kpz_table(self):
        """The d0 = 2 row reads d = 1."""
        output = run(Command.KPZ_TABLE, gamma=1.0)
        rows = {row[0]: row[1] for row in output.tables["results"].rows}
        assert rows[0.0] == 0.0
        assert rows[2.0] == pytest.approx(1.0)

    def test_moments(self):
        """One report per epsilon."""
        output = run(Command.MOMENTS, epsilons=[0.125], max_time=0.05)
        assert len(output.tables["results"].rows) == 1
        assert output.summary["zeta_q"] == pytest.approx((1.2 - 1) * (0.6 - 2))

    def test_moments_at_defaults(self):
        """moments runs with every setting at its command default."""
        config = build_config(Command.MOMENTS)
        assert config.max_time == 0.01
        output = RunOutput()
        run_command(config, output)
        rows = output.tables["results"].rows
        assert [row[2] for row in rows] == config.epsilons
        assert all(row[4] > 0.0 for row in rows)

    def test_pair_count(self):
        """One row per replicate and level."""
        output = run(Command.PAIR_COUNT, ks=[2, 3], max_time=0.25, n_replicates=2)
        assert len(output.tables["results"].rows) == 4
        assert output.summary["partial_coverage"] is True


class TestPartialRows:
    """Test that finished replicates survive a failing one."""

    @pytest.mark.parametrize("threads", ["1", "3"])
    def test_field_stats_keeps_finished_rows(self, monkeypatch, mocker, threads):
        """Rows for replicates before the failure are in the table when the error surfaces."""
        monkeypatch.setenv(THREADS_ENV, threads)

        def fail_on_third(domain, n_modes, seed, replicate=0):
            if replicate == 2:
                raise InsufficientModesError("replicate 2")
            return sample_gff(domain, n_modes, seed, replicate)

        mocker.patch("liouville.experiments.sample_gff", side_effect=fail_on_third)
        output = RunOutput()
        config = build_config(Command.FIELD_STATS, cli_values={**FAST, "n_replicates": 4, "k": 4})
        with pytest.raises(InsufficientModesError):
            run_command(config, output)
        assert [row[0] for row in output.tables["results"].rows] == [0, 1]

    def test_conformal_samples_stream(self, mocker):
        """conformal-check records sample rows as each replicate finishes."""
        calls = {"n": 0}

        def fail_after_two(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] > 4:
                raise InsufficientModesError("replicate 2")
            return 1.0

        mocker.patch("liouville.analysis.total_clock", side_effect=fail_after_two)
        output = RunOutput()
        config = build_config(Command.CONFORMAL_CHECK,
                              cli_values={**FAST, "n_replicates": 4, "k": 4, "theta": [1.0]})
        with pytest.raises(InsufficientModesError):
            run_command(config, output)
        assert [row[1] for row in output.tables["samples"].rows] == [0, 1]
        assert output.tables["results"].rows == []
