"""Tests for benchmark table structure and chart rendering.

Timings vary run to run; these tests check row sets, columns and
accounting only.
"""

import json

import pytest

from bench.chart_engine import PlotConfig, ProfileChartEngine
from bench.harness import (
    ACCURACY_COLUMNS,
    DEPTH_COLUMNS,
    MODE_COLUMNS,
    PHASE_COLUMNS,
    SCALING_COLUMNS,
    bench_accuracy,
    bench_depth_profile,
    bench_mode_comparison,
    bench_phase_profile,
    bench_scalability,
)
from engine.config_builder import TrainConfig
from engine.instrumentation import DEPTH_BUCKETS, PHASES, DepthTiming, depth_bucket
from utils.sampling import train_test_split


@pytest.fixture
def config():
    return TrainConfig(n_trees=3, seed=0, n_workers=1, bin_count=64, breakeven=128)


@pytest.fixture(scope='module')
def depth_table(trunk_small):
    return bench_depth_profile(trunk_small, TrainConfig(n_trees=3, n_workers=1, bin_count=64,
                                                        breakeven=128))


class TestDepthProfile:

    def test_schema_and_row_set(self, depth_table):
        assert list(depth_table.columns) == DEPTH_COLUMNS
        modes = list(depth_table['mode'].unique())
        assert modes == ['exact', 'hist', 'dynamic']
        depths = depth_table['depth'].max() + 1
        assert len(depth_table) == depths * len(modes)
        for _, rows in depth_table.groupby('mode'):
            assert rows['depth'].tolist() == list(range(depths))

    def test_node_counts_at_most_double(self, depth_table):
        for _, rows in depth_table.groupby('mode'):
            nodes = rows['nodes'].tolist()
            assert nodes[0] == 3
            for upper, lower in zip(nodes, nodes[1:]):
                assert lower <= 2 * upper


class TestPhaseProfile:

    @pytest.mark.parametrize('vectorized', [True, False])
    def test_schema_and_accounting(self, trunk_small, config, vectorized):
        table = bench_phase_profile(trunk_small, config, vectorized=vectorized)
        assert list(table.columns) == PHASE_COLUMNS
        assert len(table) == len(PHASES) * len(DEPTH_BUCKETS)
        assert set(table['phase']) == set(PHASES)
        assert table['seconds'].min() >= 0.0
        assert table['seconds'].sum() <= table.attrs['split_seconds']


def test_mode_comparison_normalizes_to_exact(trunk_small, config):
    table = bench_mode_comparison(trunk_small, config)
    assert list(table.columns) == MODE_COLUMNS
    assert table['mode'].tolist() == ['exact', 'hist', 'dynamic-scalar', 'dynamic-two-level']
    assert table.loc[0, 'normalized'] == 1.0


def test_accuracy_table(trunk_small, config):
    train, test = train_test_split(trunk_small, 0.25, seed=0)
    table = bench_accuracy(train, test, config, seeds=[0, 1])
    assert list(table.columns) == ACCURACY_COLUMNS
    assert len(table) == 8
    assert table['accuracy'].between(0.0, 1.0).all()


def test_scalability_table(trunk_small, config):
    table = bench_scalability(trunk_small, config, worker_counts=[1, 2])
    assert list(table.columns) == SCALING_COLUMNS
    assert table['workers'].tolist() == [1, 2]
    assert table.loc[0, 'speedup'] == 1.0


def test_depth_buckets():
    assert [depth_bucket(d) for d in (0, 4, 5, 14, 15, 40)] == ['0-4', '0-4', '5-9', '10-14',
                                                                '15+', '15+']


def test_depth_timing_merge():
    a, b = DepthTiming(), DepthTiming()
    a.record(0, 'exact', 1.0, 10)
    b.record(0, 'exact', 2.0, 5)
    b.record(1, 'leaf', 0.5, 3)
    a.merge(b)
    assert a.per_depth() == [(0, 3.0, 2, 15), (1, 0.5, 1, 3)]
    assert a.total_seconds == pytest.approx(3.5)


class TestCharts:

    @pytest.mark.parametrize('fmt', ['png', 'svg', 'pdf'])
    def test_depth_chart(self, depth_table, tmp_path, fmt):
        engine = ProfileChartEngine()
        engine.create_depth_chart(depth_table)
        out = tmp_path / 'charts' / f'depth.{fmt}'
        engine.save_chart(out, format=fmt)
        assert out.stat().st_size > 0
        engine.clear()

    def test_phase_and_mode_charts(self, trunk_small, config, tmp_path):
        engine = ProfileChartEngine()
        engine.create_phase_chart(bench_phase_profile(trunk_small, config))
        engine.save_chart(tmp_path / 'phase.png')
        engine.create_mode_chart(bench_mode_comparison(trunk_small, config),
                                 PlotConfig(title='modes', dpi=72))
        engine.save_chart(tmp_path / 'modes.png')
        assert (tmp_path / 'phase.png').exists() and (tmp_path / 'modes.png').exists()

    def test_rejects_unknown_format(self, depth_table, tmp_path):
        engine = ProfileChartEngine()
        engine.create_depth_chart(depth_table)
        with pytest.raises(ValueError, match="Invalid format"):
            engine.save_chart(tmp_path / 'x.gif', format='gif')

    def test_save_before_create(self, tmp_path):
        with pytest.raises(ValueError):
            ProfileChartEngine().save_chart(tmp_path / 'x.png')

    def test_wrong_frame(self, depth_table):
        with pytest.raises(ValueError, match="missing columns"):
            ProfileChartEngine().create_mode_chart(depth_table)

    def test_format_follows_suffix(self, depth_table, tmp_path):
        engine = ProfileChartEngine()
        engine.create_depth_chart(depth_table)
        out = engine.save_chart(tmp_path / 'depth.svg')
        assert out.read_text().lstrip().startswith('<?xml')

    def test_format_must_match_suffix(self, depth_table, tmp_path):
        engine = ProfileChartEngine()
        engine.create_depth_chart(depth_table)
        with pytest.raises(ValueError, match="does not match"):
            engine.save_chart(tmp_path / 'depth.png', format='pdf')

    def test_records_plot_settings(self, depth_table, tmp_path):
        engine = ProfileChartEngine()
        config = PlotConfig(title='depth', dpi=72, log_y=True)
        engine.create_depth_chart(depth_table, config)
        engine.save_chart(tmp_path / 'depth.png', record_settings=True)
        settings = json.loads((tmp_path / 'depth.plot.json').read_text())
        assert settings['chart'] == 'depth'
        assert settings['format'] == 'png'
        assert settings['dpi'] == 72
        assert {k: settings[k] for k in config.to_dict()} == config.to_dict()
