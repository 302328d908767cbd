"""Command-line front end: train, predict, calibrate, bench and gen-data."""

import argparse
import logging
import sys
from pathlib import Path
from time import perf_counter
from typing import List, Optional

import numpy as np
import pandas as pd

from bench.chart_engine import ProfileChartEngine
from bench.harness import (
    bench_accuracy,
    bench_depth_profile,
    bench_mode_comparison,
    bench_phase_profile,
    bench_scalability,
)
from engine.calibrate import DEFAULT_BUDGET, DEFAULT_RANGE, calibrate_crossover, make_split_probes
from engine.config_builder import SplitMode, TrainConfig
from engine.forest import accuracy, predict_batch, train_forest
from engine.model_io import load_model, save_model
from utils.dataset_reader import (
    ColumnarDataset,
    load_csv,
    load_excel,
    load_feature_matrix,
    load_libsvm,
    write_csv,
)
from utils.sampling import generate_trunk, train_test_split

logger = logging.getLogger(__name__)

DTYPES = {'float32': np.float32, 'float64': np.float64}
BENCH_KINDS = ('depth', 'phase', 'modes', 'accuracy', 'scaling')
PLOTTABLE = {'depth': 'create_depth_chart', 'phase': 'create_phase_chart', 'modes': 'create_mode_chart'}


def _breakeven(value: str) -> Optional[int]:
    if value == 'auto':
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive integer, got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"breakeven must be positive, got {n}")
    return n


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _add_data_flags(parser: argparse.ArgumentParser, required: bool = True):
    group = parser.add_argument_group('input data')
    group.add_argument('--data', required=required, help='dataset path')
    group.add_argument('--format', choices=['csv', 'libsvm', 'xlsx'], default='csv',
                       help='dataset format (default: csv)')
    group.add_argument('--label-column', default='-1',
                       help='label column name or position (default: -1, the last column)')
    group.add_argument('--no-header', action='store_true', help='CSV has no header line')
    group.add_argument('--features', type=int, default=None,
                       help='feature count, required for libsvm input')
    group.add_argument('--dtype', choices=sorted(DTYPES), default='float32',
                       help='feature storage precision (default: float32)')


def _add_train_flags(parser: argparse.ArgumentParser):
    defaults = TrainConfig()
    group = parser.add_argument_group('training')
    group.add_argument('--trees', type=int, default=defaults.n_trees,
                       help=f'number of trees (default: {defaults.n_trees})')
    group.add_argument('--bins', type=int, default=defaults.bin_count,
                       help=f'histogram bins per node (default: {defaults.bin_count})')
    group.add_argument('--mode', choices=[m.value for m in SplitMode], default=defaults.split_mode.value,
                       help='split finder: exact, hist or dynamic (default: dynamic)')
    group.add_argument('--breakeven', type=_breakeven, default=None, metavar='auto|N',
                       help='node size at which histograms take over (default: auto, calibrated)')
    group.add_argument('--threads', type=int, default=None,
                       help='worker count (default: all cores; 1 gives the reference run)')
    group.add_argument('--seed', type=int, default=defaults.seed,
                       help=f'random seed (default: {defaults.seed})')
    group.add_argument('--bootstrap', type=float, default=defaults.bootstrap_fraction,
                       help=f'per-tree row fraction (default: {defaults.bootstrap_fraction})')
    group.add_argument('--max-depth', type=int, default=None,
                       help='depth limit (default: none, grow to purity)')
    group.add_argument('--min-samples', type=int, default=defaults.min_samples,
                       help=f'smallest node that may split (default: {defaults.min_samples})')
    group.add_argument('--retries', type=int, default=defaults.max_split_retries,
                       help=f'projection resamples before a leaf (default: {defaults.max_split_retries})')
    group.add_argument('--binning', choices=['two-level', 'scalar'], default='two-level',
                       help='histogram bin lookup (default: two-level)')
    group.add_argument('--calibration-budget', type=float, default=defaults.calibration_budget,
                       help=f'seconds for startup calibration (default: {defaults.calibration_budget})')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sparse-oblique-forest',
        description='Sparse oblique random forests with dynamic histogram splitting.',
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='log progress to stderr')
    sub = parser.add_subparsers(dest='command', required=True)

    train = sub.add_parser('train', help='train a forest and write a model file')
    _add_data_flags(train)
    _add_train_flags(train)
    train.add_argument('--out', required=True, help='model output path')

    predict = sub.add_parser('predict', help='predict classes with a saved model')
    predict.add_argument('--model', required=True, help='model file from train')
    _add_data_flags(predict)
    predict.add_argument('--no-labels', action='store_true',
                         help='input has feature columns only (CSV)')
    predict.add_argument('--votes', action='store_true', help='also write per-class vote fractions')
    predict.add_argument('--out', required=True, help='predictions CSV path')

    calibrate = sub.add_parser('calibrate', help='measure the exact/histogram breakeven')
    calibrate.add_argument('--bins', type=int, default=256, help='histogram bins (default: 256)')
    calibrate.add_argument('--classes', type=int, default=2, help='class count (default: 2)')
    calibrate.add_argument('--budget', type=float, default=DEFAULT_BUDGET,
                           help=f'wall-clock budget in seconds (default: {DEFAULT_BUDGET})')
    calibrate.add_argument('--min-n', type=int, default=DEFAULT_RANGE[0],
                           help=f'smallest node size measured (default: {DEFAULT_RANGE[0]})')
    calibrate.add_argument('--max-n', type=int, default=DEFAULT_RANGE[1],
                           help=f'largest node size measured (default: {DEFAULT_RANGE[1]})')
    calibrate.add_argument('--binning', choices=['two-level', 'scalar'], default='two-level')
    calibrate.add_argument('--dtype', choices=sorted(DTYPES), default='float32')
    calibrate.add_argument('--seed', type=int, default=0)
    calibrate.add_argument('--out', default=None, help='optional CSV of the measured samples')

    bench = sub.add_parser('bench', help='run a benchmark and write its CSV table')
    bench.add_argument('--kind', choices=BENCH_KINDS, required=True, help='benchmark to run')
    _add_data_flags(bench, required=False)
    _add_train_flags(bench)
    bench.add_argument('--samples', type=int, default=100_000,
                       help='Trunk rows when --data is omitted (default: 100000)')
    bench.add_argument('--trunk-features', type=int, default=256,
                       help='Trunk features when --data is omitted (default: 256)')
    bench.add_argument('--seeds', type=_int_list, default=[0, 1, 2, 3, 4],
                       help='seeds for the accuracy table (default: 0,1,2,3,4)')
    bench.add_argument('--workers', type=_int_list, default=[1, 2, 4, 8],
                       help='worker counts for the scaling table (default: 1,2,4,8)')
    bench.add_argument('--out', required=True, help='CSV output path')
    bench.add_argument('--plot', default=None,
                       help='also render depth/phase/modes tables to PNG, SVG or PDF')

    gen = sub.add_parser('gen-data', help='write a synthetic dataset as CSV')
    gen.add_argument('--kind', choices=['trunk'], default='trunk')
    gen.add_argument('--samples', type=int, required=True, help='row count (even)')
    gen.add_argument('--features', type=int, required=True, help='feature count')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', required=True, help='CSV output path')
    return parser


def _label_column(value: str):
    try:
        return int(value)
    except ValueError:
        return value


def load_dataset(args: argparse.Namespace, label_names=None) -> ColumnarDataset:
    """Load the --data file according to the data flags."""
    dtype = DTYPES[args.dtype]
    if args.format == 'libsvm':
        if args.features is None:
            raise ValueError("--features is required for libsvm input")
        return load_libsvm(args.data, args.features, dtype=dtype, label_names=label_names)
    if args.format == 'xlsx':
        return load_excel(args.data, _label_column(args.label_column), dtype=dtype,
                          label_names=label_names)
    return load_csv(args.data, _label_column(args.label_column), has_header=not args.no_header,
                    dtype=dtype, label_names=label_names)


def config_from_args(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        n_trees=args.trees,
        seed=args.seed,
        n_workers=args.threads,
        bootstrap_fraction=args.bootstrap,
        max_depth=args.max_depth,
        min_samples=args.min_samples,
        max_split_retries=args.retries,
        split_mode=SplitMode(args.mode),
        bin_count=args.bins,
        breakeven=args.breakeven,
        vectorized_binning=args.binning == 'two-level',
        calibration_budget=args.calibration_budget,
    )


def run_train(args: argparse.Namespace) -> int:
    config = config_from_args(args).validate()
    dataset = load_dataset(args)

    t0 = perf_counter()
    forest = train_forest(dataset, config)
    elapsed = perf_counter() - t0
    save_model(forest, args.out)

    breakeven = forest.config.breakeven if forest.config.split_mode is SplitMode.DYNAMIC else 'n/a'
    print(f"trained {len(forest.trees)} trees in {elapsed:.2f} s (breakeven {breakeven})")
    return 0


def run_predict(args: argparse.Namespace) -> int:
    forest = load_model(args.model)
    labels = None
    if args.no_labels:
        columns = load_feature_matrix(args.data, has_header=not args.no_header,
                                      dtype=DTYPES[args.dtype])
    else:
        dataset = load_dataset(args, label_names=forest.label_names)
        columns, labels = dataset.columns, dataset.labels

    if columns.shape[0] != forest.n_features:
        raise ValueError(f"Model expects {forest.n_features} features, data has {columns.shape[0]}")
    predicted, fractions = predict_batch(forest, columns)

    table = pd.DataFrame({'prediction': [forest.label_names[c] for c in predicted]})
    if args.votes:
        for class_id, name in enumerate(forest.label_names):
            table[f'votes_{name}'] = fractions[:, class_id]
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False)

    if labels is not None:
        print(f"accuracy {np.mean(predicted == labels):.4f} on {labels.shape[0]} samples")
    return 0


def run_calibrate(args: argparse.Namespace) -> int:
    time_exact, time_histogram = make_split_probes(
        bin_count=args.bins, class_count=args.classes, seed=args.seed,
        vectorized=args.binning == 'two-level', dtype=DTYPES[args.dtype],
    )
    calibration = calibrate_crossover(time_exact, time_histogram, args.min_n, args.max_n,
                                      budget=args.budget)
    table = pd.DataFrame(
        [[s.n, s.exact_time, s.histogram_time] for s in calibration.samples],
        columns=['n', 'exact_seconds', 'histogram_seconds'],
    )
    print(f"breakeven {calibration.breakeven_n}")
    print(table.to_csv(index=False), end='')
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False)
    return 0


def run_bench(args: argparse.Namespace) -> int:
    config = config_from_args(args).validate()
    if args.data:
        dataset = load_dataset(args)
    else:
        dataset = generate_trunk(args.samples, args.trunk_features, seed=args.seed,
                                 dtype=DTYPES[args.dtype])

    if args.kind == 'depth':
        table = bench_depth_profile(dataset, config)
    elif args.kind == 'phase':
        table = bench_phase_profile(dataset, config, vectorized=config.vectorized_binning)
    elif args.kind == 'modes':
        table = bench_mode_comparison(dataset, config)
    elif args.kind == 'accuracy':
        train, test = train_test_split(dataset, test_fraction=0.2, seed=args.seed)
        table = bench_accuracy(train, test, config, seeds=args.seeds)
    else:
        table = bench_scalability(dataset, config, worker_counts=args.workers)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False)
    print(f"wrote {len(table)} rows to {out_path}")

    if args.plot:
        if args.kind not in PLOTTABLE:
            raise ValueError(f"--plot supports {', '.join(PLOTTABLE)}, not {args.kind}")
        engine = ProfileChartEngine()
        getattr(engine, PLOTTABLE[args.kind])(table)
        engine.save_chart(args.plot, record_settings=True)
        engine.clear()
    return 0


def run_gen_data(args: argparse.Namespace) -> int:
    if args.kind != 'trunk':
        raise ValueError(f"Unknown dataset kind: {args.kind}")
    dataset = generate_trunk(args.samples, args.features, seed=args.seed)
    write_csv(dataset, args.out)
    print(f"wrote {dataset.n_samples} x {dataset.n_features} {args.kind} dataset to {args.out}")
    return 0


COMMANDS = {
    'train': run_train,
    'predict': run_predict,
    'calibrate': run_calibrate,
    'bench': run_bench,
    'gen-data': run_gen_data,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Returns:
        0 on success, 1 on a runtime error; usage errors exit with 2
        from argparse
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
