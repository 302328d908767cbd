"""Tree and forest training, and majority-vote prediction."""

import logging
from dataclasses import dataclass, replace
from time import perf_counter
from typing import List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from utils.dataset_reader import ColumnarDataset, SampleIndexSet
from utils.sampling import bootstrap_sample

from .calibrate import CrossoverCalibration, calibrate_crossover, make_split_probes
from .config_builder import SplitMode, TrainConfig
from .instrumentation import TrainingProfile
from .projection import ProjectionConfig, project_columns, sample_projection_matrix
from .split import SplitMethod, SplitScratch, choose_method, find_node_split

logger = logging.getLogger(__name__)

Projection = Tuple[Tuple[int, float], ...]


@dataclass(frozen=True)
class Leaf:
    class_counts: Tuple[int, ...]
    predicted_class: int


@dataclass(frozen=True)
class Internal:
    """Samples go left iff their projected value is <= threshold."""
    projection: Projection
    threshold: float
    left: 'DecisionNode'
    right: 'DecisionNode'


DecisionNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class Forest:
    trees: Tuple[DecisionNode, ...]
    class_count: int
    n_features: int
    label_names: Tuple[str, ...]
    config: TrainConfig
    calibration: Optional[CrossoverCalibration] = None
    value_dtype: str = 'float32'

    def node_count(self) -> int:
        return sum(_count_nodes(tree) for tree in self.trees)

    def max_depth(self) -> int:
        return max(_tree_depth(tree) for tree in self.trees)


def _count_nodes(root: DecisionNode) -> int:
    total, stack = 0, [root]
    while stack:
        node = stack.pop()
        total += 1
        if isinstance(node, Internal):
            stack.extend((node.left, node.right))
    return total


def _tree_depth(root: DecisionNode) -> int:
    deepest, stack = 0, [(root, 0)]
    while stack:
        node, depth = stack.pop()
        deepest = max(deepest, depth)
        if isinstance(node, Internal):
            stack.extend(((node.left, depth + 1), (node.right, depth + 1)))
    return deepest


def flatten_tree(root: DecisionNode) -> List[list]:
    """Preorder node list: ``['L', counts, class]`` or ``['I', features, weights, threshold]``."""
    nodes, stack = [], [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            nodes.append(['L', list(node.class_counts), node.predicted_class])
        else:
            nodes.append(['I', [f for f, _ in node.projection], [w for _, w in node.projection],
                          node.threshold])
            # right pushed first so the left subtree follows its parent
            stack.append(node.right)
            stack.append(node.left)
    return nodes


def unflatten_tree(nodes: List[list]) -> DecisionNode:
    """
    Inverse of flatten_tree.

    Raises:
        ValueError: On an unknown tag or a list that is not one whole tree
    """
    # walk preorder backwards, keeping completed subtrees on a stack
    built: List[DecisionNode] = []
    for entry in reversed(nodes):
        if entry[0] == 'L':
            built.append(Leaf(class_counts=tuple(int(c) for c in entry[1]),
                              predicted_class=int(entry[2])))
        elif entry[0] == 'I':
            if len(built) < 2:
                raise ValueError("Malformed tree encoding")
            left = built.pop()
            right = built.pop()
            projection = tuple((int(f), float(w)) for f, w in zip(entry[1], entry[2]))
            built.append(Internal(projection=projection, threshold=float(entry[3]),
                                  left=left, right=right))
        else:
            raise ValueError(f"Unknown node tag {entry[0]!r}")
    if len(built) != 1:
        raise ValueError("Malformed tree encoding")
    return built[0]


def _make_leaf(counts: np.ndarray) -> Leaf:
    # argmax returns the first maximum: ties go to the lowest class id
    return Leaf(class_counts=tuple(int(c) for c in counts), predicted_class=int(np.argmax(counts)))


def node_method(config: TrainConfig, n_active: int) -> SplitMethod:
    """Split method for a node under the configured mode."""
    if config.split_mode is SplitMode.EXACT_ONLY:
        return SplitMethod.EXACT
    if config.split_mode is SplitMode.HISTOGRAM_ONLY:
        return SplitMethod.HISTOGRAM
    return choose_method(n_active, config.resolved_breakeven())


def _split_node(dataset: ColumnarDataset, active: SampleIndexSet, config: TrainConfig,
                rng: np.random.Generator, depth: int, profile: Optional[TrainingProfile],
                scratch: SplitScratch) -> Union[Leaf, Tuple[Projection, float, np.ndarray, np.ndarray]]:
    """Leaf for this node, or (projection, threshold, left indices, right indices)."""
    t0 = perf_counter()
    n_active = len(active)
    counts = np.bincount(dataset.labels[active.indices], minlength=dataset.class_count)

    if (np.count_nonzero(counts) <= 1 or n_active < config.min_samples
            or (config.max_depth is not None and depth >= config.max_depth)):
        if profile is not None:
            profile.depth.record(depth, 'leaf', perf_counter() - t0, n_active)
        return _make_leaf(counts)

    method = node_method(config, n_active)
    projection_config = ProjectionConfig.for_features(dataset.n_features)
    phases = profile.phases if profile is not None else None

    split = None
    for attempt in range(config.max_split_retries + 1):
        ts = perf_counter()
        projections = sample_projection_matrix(projection_config, rng)
        if phases is not None:
            phases.add('sample_projection', depth, perf_counter() - ts)

        found = find_node_split(dataset, active, projections, method, rng,
                                bin_count=config.bin_count,
                                vectorized=config.vectorized_binning,
                                scratch=scratch, phases=phases, depth=depth)
        if found is None:
            logger.debug("No split at depth %d (n=%d), attempt %d", depth, n_active, attempt)
            continue
        candidate, row = found
        values = project_columns(dataset.columns, row, active.indices)
        go_left = values.astype(np.float64) <= candidate.threshold
        left = active.indices[go_left]
        right = active.indices[~go_left]
        if left.shape[0] and right.shape[0]:
            split = (row.as_pairs(), candidate.threshold, left, right)
            break

    elapsed = perf_counter() - t0
    if profile is not None:
        profile.depth.record(depth, method.value, elapsed, n_active)
        profile.split_seconds += elapsed
    if split is None:
        return _make_leaf(counts)
    return split


def train_tree(dataset: ColumnarDataset, active: SampleIndexSet, config: TrainConfig,
               rng: np.random.Generator, depth: int = 0, *,
               profile: Optional[TrainingProfile] = None,
               scratch: Optional[SplitScratch] = None) -> DecisionNode:
    """
    Grow a tree on the active samples, to purity unless limited.

    Nodes are expanded from an explicit work stack, so tree depth is not
    bounded by the interpreter's recursion limit. Children draw from
    generators spawned off their parent's, so a node's random stream
    depends only on its position in the tree.

    Args:
        dataset: Training table
        active: Samples reaching this node (at least one)
        config: Training configuration
        rng: Random source for this node
        depth: Depth of this node
        profile: Optional timing accumulator
        scratch: Per-worker buffers; created on demand

    Returns:
        Root of the grown subtree
    """
    if scratch is None:
        scratch = SplitScratch(config.bin_count, dataset.class_count, len(active))

    # slot -> Leaf, or (projection, threshold, left slot, right slot); children follow parents
    grown: List = [None]
    pending = [(0, active, rng, depth)]
    while pending:
        slot, node_active, node_rng, node_depth = pending.pop()
        result = _split_node(dataset, node_active, config, node_rng, node_depth, profile, scratch)
        if isinstance(result, Leaf):
            grown[slot] = result
            continue
        projection, threshold, left, right = result
        left_rng, right_rng = node_rng.spawn(2)
        left_slot = len(grown)
        grown.extend((None, None))
        grown[slot] = (projection, threshold, left_slot, left_slot + 1)
        pending.append((left_slot + 1, SampleIndexSet(right), right_rng, node_depth + 1))
        pending.append((left_slot, SampleIndexSet(left), left_rng, node_depth + 1))

    built: List[Optional[DecisionNode]] = [None] * len(grown)
    for slot in range(len(grown) - 1, -1, -1):
        entry = grown[slot]
        if isinstance(entry, Leaf):
            built[slot] = entry
        else:
            projection, threshold, left_slot, right_slot = entry
            built[slot] = Internal(projection=projection, threshold=threshold,
                                   left=built[left_slot], right=built[right_slot])
            built[left_slot] = built[right_slot] = None
    return built[0]


def tree_streams(seed: int, tree_index: int) -> Tuple[np.random.SeedSequence, np.random.Generator]:
    """Independent bootstrap seed and root generator for one tree."""
    bootstrap_seq, node_seq = np.random.SeedSequence(seed, spawn_key=(tree_index,)).spawn(2)
    return bootstrap_seq, np.random.default_rng(node_seq)


def train_single_tree(dataset: ColumnarDataset, config: TrainConfig, tree_index: int,
                      with_profile: bool = False) -> Tuple[DecisionNode, Optional[TrainingProfile]]:
    """Train tree ``tree_index`` of a forest from its own derived streams."""
    bootstrap_seq, rng = tree_streams(config.seed, tree_index)
    active = bootstrap_sample(dataset, config.bootstrap_fraction, seed=bootstrap_seq)
    profile = TrainingProfile() if with_profile else None
    root = train_tree(dataset, active, config, rng, 0, profile=profile)
    return root, profile


def _train_flat_tree(dataset: ColumnarDataset, config: TrainConfig, tree_index: int,
                     with_profile: bool) -> Tuple[List[list], Optional[TrainingProfile]]:
    # workers hand back flat node lists; pickling nested nodes recurses once per level
    root, profile = train_single_tree(dataset, config, tree_index, with_profile)
    return flatten_tree(root), profile


def calibrate_for(dataset: ColumnarDataset, config: TrainConfig) -> CrossoverCalibration:
    """Run the startup microbenchmark for this dataset's class count and precision."""
    time_exact, time_histogram = make_split_probes(
        bin_count=config.bin_count, class_count=dataset.class_count, seed=config.seed,
        vectorized=config.vectorized_binning, dtype=dataset.dtype,
    )
    low, high = config.calibration_range
    return calibrate_crossover(time_exact, time_histogram, low, high,
                               budget=config.calibration_budget)


def train_forest(dataset: ColumnarDataset, config: TrainConfig,
                 profile: Optional[TrainingProfile] = None) -> Forest:
    """
    Train ``config.n_trees`` trees in a worker pool.

    Each tree uses a bootstrap and random stream derived from
    (seed, tree index), so the forest does not depend on the worker count.

    Args:
        dataset: Training table
        config: Training configuration
        profile: If given, receives the merged timings of all workers

    Raises:
        ValueError: If the configuration is invalid
    """
    config.validate()
    calibration = None
    if config.split_mode is SplitMode.DYNAMIC and config.breakeven is None:
        calibration = calibrate_for(dataset, config)
        config = replace(config, breakeven=calibration.breakeven_n)

    n_jobs = config.n_workers if config.n_workers is not None else -1
    logger.info("Training %d trees (%s, breakeven=%s) on %d x %d with n_jobs=%d",
                config.n_trees, config.split_mode.value, config.breakeven,
                dataset.n_samples, dataset.n_features, n_jobs)

    results = Parallel(n_jobs=n_jobs)(
        delayed(_train_flat_tree)(dataset, config, i, profile is not None)
        for i in range(config.n_trees)
    )

    trees = tuple(unflatten_tree(nodes) for nodes, _ in results)
    if profile is not None:
        for _, worker_profile in results:
            profile.merge(worker_profile)

    return Forest(
        trees=trees,
        class_count=dataset.class_count,
        n_features=dataset.n_features,
        label_names=dataset.label_names,
        config=config,
        calibration=calibration,
        value_dtype=np.dtype(dataset.dtype).name,
    )


def _leaf_for(root: DecisionNode, sample: np.ndarray, dtype: np.dtype) -> Leaf:
    node = root
    while isinstance(node, Internal):
        acc = 0.0
        for feature, weight in node.projection:
            acc += weight * float(sample[feature])
        value = float(dtype.type(acc))
        node = node.left if value <= node.threshold else node.right
    return node


def predict(forest: Forest, sample) -> Tuple[int, np.ndarray]:
    """
    Majority vote over the forest for one feature vector.

    Returns:
        (class id, per-class vote fractions); ties go to the lowest class id

    Raises:
        ValueError: If the vector length differs from the model's feature count
    """
    dtype = np.dtype(forest.value_dtype)
    x = np.asarray(sample)
    if x.shape != (forest.n_features,):
        raise ValueError(f"Expected {forest.n_features} features, got {x.shape[-1] if x.ndim else 0}")
    x = x.astype(dtype)

    votes = np.zeros(forest.class_count, dtype=np.float64)
    for tree in forest.trees:
        votes[_leaf_for(tree, x, dtype).predicted_class] += 1
    fractions = votes / len(forest.trees)
    return int(np.argmax(votes)), fractions


def _route(root: DecisionNode, columns: np.ndarray, out: np.ndarray):
    """Write each sample's leaf class into ``out`` by partitioning index sets."""
    stack: List[Tuple[DecisionNode, np.ndarray]] = [(root, np.arange(columns.shape[1]))]
    while stack:
        node, idx = stack.pop()
        if idx.shape[0] == 0:
            continue
        if isinstance(node, Leaf):
            out[idx] = node.predicted_class
            continue
        values = project_columns(columns, node.projection, idx)
        go_left = values.astype(np.float64) <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))


def predict_batch(forest: Forest, columns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predict many samples given feature-major columns (n_features, n_samples).

    Returns:
        (class ids, vote fractions of shape (n_samples, class_count))

    Raises:
        ValueError: If the feature count differs from the model's
    """
    if columns.ndim != 2 or columns.shape[0] != forest.n_features:
        raise ValueError(f"Expected {forest.n_features} features, got {columns.shape[0]}")
    columns = np.ascontiguousarray(columns, dtype=np.dtype(forest.value_dtype))
    n = columns.shape[1]
    votes = np.zeros((n, forest.class_count), dtype=np.float64)
    leaf_class = np.empty(n, dtype=np.intp)
    rows = np.arange(n)
    for tree in forest.trees:
        _route(tree, columns, leaf_class)
        votes[rows, leaf_class] += 1
    fractions = votes / len(forest.trees)
    return np.argmax(votes, axis=1), fractions


def accuracy(forest: Forest, dataset: ColumnarDataset) -> float:
    predicted, _ = predict_batch(forest, dataset.columns)
    return float(np.mean(predicted == dataset.labels))
