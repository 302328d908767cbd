"""Benchmark harness and chart rendering."""

from engine.instrumentation import DepthTiming, PhaseTiming, TrainingProfile

from .chart_engine import PlotConfig, ProfileChartEngine
from .harness import (
    bench_accuracy,
    bench_depth_profile,
    bench_mode_comparison,
    bench_phase_profile,
    bench_scalability,
)

__all__ = [
    'DepthTiming', 'PhaseTiming', 'TrainingProfile',
    'PlotConfig', 'ProfileChartEngine',
    'bench_accuracy', 'bench_depth_profile', 'bench_mode_comparison',
    'bench_phase_profile', 'bench_scalability',
]
