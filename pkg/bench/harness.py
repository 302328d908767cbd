"""Benchmark harness: per-depth and per-phase runtime profiles and mode comparisons.

CSV schemas (column order is fixed):

* depth profile: depth, mode, seconds, nodes, samples
* phase profile: phase, depth_bucket, seconds
* mode comparison: mode, seconds, normalized
* accuracy: mode, seed, accuracy
* scalability: workers, seconds, speedup
"""

import logging
from dataclasses import replace
from time import perf_counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from engine.config_builder import SplitMode, TrainConfig
from engine.forest import Forest, accuracy, calibrate_for, train_forest
from engine.instrumentation import DEPTH_BUCKETS, PHASES, TrainingProfile
from utils.dataset_reader import ColumnarDataset

logger = logging.getLogger(__name__)

DEPTH_COLUMNS = ['depth', 'mode', 'seconds', 'nodes', 'samples']
PHASE_COLUMNS = ['phase', 'depth_bucket', 'seconds']
MODE_COLUMNS = ['mode', 'seconds', 'normalized']
ACCURACY_COLUMNS = ['mode', 'seed', 'accuracy']
SCALING_COLUMNS = ['workers', 'seconds', 'speedup']

# label -> (split mode, vectorized binning)
PROFILE_MODES: Dict[str, Tuple[SplitMode, bool]] = {
    'exact': (SplitMode.EXACT_ONLY, True),
    'hist': (SplitMode.HISTOGRAM_ONLY, True),
    'dynamic': (SplitMode.DYNAMIC, True),
}
COMPARISON_MODES: Dict[str, Tuple[SplitMode, bool]] = {
    'exact': (SplitMode.EXACT_ONLY, True),
    'hist': (SplitMode.HISTOGRAM_ONLY, True),
    'dynamic-scalar': (SplitMode.DYNAMIC, False),
    'dynamic-two-level': (SplitMode.DYNAMIC, True),
}


def with_breakeven(dataset: ColumnarDataset, config: TrainConfig) -> TrainConfig:
    """Calibrate once up front so every dynamic run shares the same breakeven."""
    if config.breakeven is not None:
        return config
    calibration = calibrate_for(dataset, config)
    return replace(config, breakeven=calibration.breakeven_n)


def _timed_fit(dataset: ColumnarDataset, config: TrainConfig,
               profile: Optional[TrainingProfile] = None) -> Tuple[float, Forest]:
    t0 = perf_counter()
    forest = train_forest(dataset, config, profile=profile)
    return perf_counter() - t0, forest


def bench_depth_profile(dataset: ColumnarDataset, config: TrainConfig) -> pd.DataFrame:
    """
    Training time per tree depth under exact, histogram and dynamic splitting.

    Every mode reports the same depth range, padded with zeros below the
    deepest level it reached.
    """
    config = with_breakeven(dataset, config)
    profiles = {}
    for label, (mode, vectorized) in PROFILE_MODES.items():
        profile = TrainingProfile()
        _timed_fit(dataset, replace(config, split_mode=mode, vectorized_binning=vectorized), profile)
        profiles[label] = profile
        logger.info("depth profile %s: %.2fs over %d levels", label,
                    profile.depth.total_seconds, profile.depth.max_depth + 1)

    deepest = max(p.depth.max_depth for p in profiles.values())
    rows = []
    for label, profile in profiles.items():
        per_depth = {d: (s, n, k) for d, s, n, k in profile.depth.per_depth()}
        for depth in range(deepest + 1):
            seconds, nodes, samples = per_depth.get(depth, (0.0, 0, 0))
            rows.append([depth, label, seconds, nodes, samples])
    return pd.DataFrame(rows, columns=DEPTH_COLUMNS)


def bench_phase_profile(dataset: ColumnarDataset, config: TrainConfig,
                        vectorized: bool = True) -> pd.DataFrame:
    """
    Per-phase split time of histogram-only training, bucketed by depth.

    The frame's ``attrs['split_seconds']`` holds the total node-split time
    the phases should account for.
    """
    profile = TrainingProfile()
    run_config = replace(config, split_mode=SplitMode.HISTOGRAM_ONLY, vectorized_binning=vectorized)
    _timed_fit(dataset, run_config, profile)

    rows = [[phase, bucket, profile.phases.seconds.get((phase, bucket), 0.0)]
            for phase in PHASES for bucket in DEPTH_BUCKETS]
    frame = pd.DataFrame(rows, columns=PHASE_COLUMNS)
    frame.attrs['split_seconds'] = profile.split_seconds
    return frame


def bench_mode_comparison(dataset: ColumnarDataset, config: TrainConfig) -> pd.DataFrame:
    """End-to-end training time of each mode, normalized to exact splitting."""
    config = with_breakeven(dataset, config)
    timings: List[Tuple[str, float]] = []
    for label, (mode, vectorized) in COMPARISON_MODES.items():
        seconds, _ = _timed_fit(dataset, replace(config, split_mode=mode, vectorized_binning=vectorized))
        logger.info("mode %s: %.2fs", label, seconds)
        timings.append((label, seconds))

    baseline = timings[0][1]
    rows = [[label, seconds, seconds / baseline] for label, seconds in timings]
    return pd.DataFrame(rows, columns=MODE_COLUMNS)


def bench_accuracy(train: ColumnarDataset, test: ColumnarDataset, config: TrainConfig,
                   seeds: Sequence[int] = (0, 1, 2, 3, 4)) -> pd.DataFrame:
    """Hold-out accuracy of every comparison mode across seeds."""
    config = with_breakeven(train, config)
    rows = []
    for seed in seeds:
        for label, (mode, vectorized) in COMPARISON_MODES.items():
            run_config = replace(config, split_mode=mode, vectorized_binning=vectorized, seed=seed)
            _, forest = _timed_fit(train, run_config)
            rows.append([label, seed, accuracy(forest, test)])
    return pd.DataFrame(rows, columns=ACCURACY_COLUMNS)


def bench_scalability(dataset: ColumnarDataset, config: TrainConfig,
                      worker_counts: Iterable[int] = (1, 2, 4, 8)) -> pd.DataFrame:
    """Training time against worker count; speedup is relative to the first count."""
    config = with_breakeven(dataset, config)
    rows = []
    for workers in worker_counts:
        seconds, _ = _timed_fit(dataset, replace(config, n_workers=workers))
        rows.append([workers, seconds])
    base = rows[0][1]
    return pd.DataFrame([[w, s, base / s] for w, s in rows], columns=SCALING_COLUMNS)
