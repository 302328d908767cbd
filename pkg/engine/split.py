"""Best-split search at a tree node: histograms, exact sorting and dispatch."""

from dataclasses import dataclass, replace
from enum import Enum
from time import perf_counter
from typing import Optional, Tuple

import numpy as np
from scipy.special import entr

from utils.dataset_reader import ColumnarDataset, SampleIndexSet

from . import kernels
from .projection import ProjectionMatrix, SparseRow, apply_projection

DEFAULT_BIN_COUNT = 256

# Gains closer than this are ties; a split must beat MIN_GAIN to be accepted.
GAIN_TIE_TOLERANCE = 1e-12
MIN_GAIN = 1e-12

# boundary count -> fine group width (256 bins = 16x16, 64 bins = 8x8)
TWO_LEVEL_WIDTHS = {255: 16, 63: 8}

_LOG2 = np.log(2.0)


class SplitMethod(Enum):
    EXACT = 'exact'
    HISTOGRAM = 'histogram'


@dataclass(frozen=True)
class SplitCandidate:
    """Best threshold found for one projection."""
    projection_index: int
    threshold: float
    gain: float
    left_count: int
    right_count: int


@dataclass(frozen=True, eq=False)
class TwoLevelTable:
    """
    Boundaries regrouped for two wide compares per lookup.

    ``fine`` holds the boundaries in ``width`` groups of ``width`` (last
    group padded with +inf); ``coarse[g]`` is the last entry of group g.
    """
    coarse: np.ndarray
    fine: np.ndarray
    n_boundaries: int

    @property
    def width(self) -> int:
        return int(self.coarse.shape[0])

    @property
    def bin_count(self) -> int:
        return self.width * self.width

    @classmethod
    def from_boundaries(cls, boundaries: np.ndarray) -> Optional['TwoLevelTable']:
        """Build the table, or return None if the boundary count has no layout."""
        n = int(boundaries.shape[0])
        width = TWO_LEVEL_WIDTHS.get(n)
        if width is None:
            return None
        padded = np.full(width * width, np.inf)
        padded[:n] = boundaries
        fine = padded.reshape(width, width)
        coarse = np.ascontiguousarray(fine[:, -1])
        return cls(coarse=coarse, fine=fine, n_boundaries=n)

    def flatten(self) -> np.ndarray:
        return self.fine.ravel()[:self.n_boundaries]


@dataclass(frozen=True, eq=False)
class Histogram:
    """Per-bin per-class sample counts over sorted boundaries."""
    boundaries: np.ndarray
    counts: np.ndarray

    @property
    def total_per_bin(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())


class SplitScratch:
    """
    Per-worker buffers reused across nodes.

    Histograms built on a scratch share its count buffer and stay valid only
    until the next build.
    """

    def __init__(self, bin_count: int, class_count: int, capacity: int = 0):
        self.class_count = class_count
        self._counts = np.zeros((max(bin_count, 2), class_count), dtype=np.uint32)
        self._projected = np.empty(max(capacity, 1), dtype=np.float64)

    def counts(self, n_bins: int) -> np.ndarray:
        """Zeroed count block for n_bins bins; costs O(bins * classes)."""
        if n_bins > self._counts.shape[0]:
            self._counts = np.zeros((n_bins, self.class_count), dtype=np.uint32)
        block = self._counts[:n_bins]
        block.fill(0)
        return block

    def projected(self, n: int) -> np.ndarray:
        """float64 accumulator of at least n entries."""
        if n > self._projected.shape[0]:
            self._projected = np.empty(max(n, 2 * self._projected.shape[0]), dtype=np.float64)
        return self._projected


def _midpoints(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Cut points between consecutive distinct values, each in [lo, hi)."""
    lo = lo.astype(np.float64)
    hi = hi.astype(np.float64)
    mid = 0.5 * (lo + hi)
    return np.where(mid >= hi, lo, mid)


def sample_boundaries(values: np.ndarray, bin_count: int,
                      rng: np.random.Generator) -> np.ndarray:
    """
    Draw random-width bin boundaries from the node's distinct values.

    Each boundary is the midpoint between a randomly chosen distinct value
    and the next larger distinct value, so every boundary separates samples.
    Small nodes pick from the full sorted distinct set; large nodes draw
    candidate values by position and locate successors in a single pass.

    Returns:
        min(bin_count - 1, distinct - 1) strictly increasing float64 boundaries
    """
    n = int(values.shape[0])
    need = bin_count - 1
    if n > 2 * bin_count:
        top = values.max()
        picked = np.unique(values[rng.choice(n, size=2 * need, replace=False)])
        picked = picked[picked < top]
        if picked.shape[0] >= need:
            chosen = np.sort(rng.choice(picked, size=need, replace=False)).astype(np.float64)
            succ = kernels.successor_values(chosen, values.astype(np.float64))
            return _midpoints(chosen, succ)

    distinct = np.unique(values)
    if distinct.shape[0] < 2:
        return np.empty(0, dtype=np.float64)
    gaps = distinct.shape[0] - 1
    if need >= gaps:
        idx = np.arange(gaps)
    else:
        idx = np.sort(rng.choice(gaps, size=need, replace=False))
    return _midpoints(distinct[idx], distinct[idx + 1])


def bin_index_scalar(boundaries: np.ndarray, v: float) -> int:
    """Count of boundaries <= v; boundary-equal values go right."""
    return int(kernels.upper_bound(np.asarray(boundaries, dtype=np.float64), np.float64(v)))


def bin_index_two_level(table: TwoLevelTable, v: float) -> int:
    """Same result as bin_index_scalar on the flattened boundaries."""
    return int(kernels.two_level_lookup(table.coarse, table.fine, table.n_boundaries,
                                        np.float64(v)))


def bin_indices(boundaries: np.ndarray, values: np.ndarray,
                table: Optional[TwoLevelTable] = None) -> np.ndarray:
    """Vector form of the bin lookups; uses the table when one is given."""
    out = np.empty(values.shape[0], dtype=np.intp)
    if table is not None:
        kernels.bin_indices_two_level(table.coarse, table.fine, table.n_boundaries, values, out)
    else:
        kernels.bin_indices_scalar(np.asarray(boundaries, dtype=np.float64), values, out)
    return out


def build_histogram(values: np.ndarray, labels_at: np.ndarray, boundaries: np.ndarray,
                    class_count: int, vectorized: bool = True,
                    scratch: Optional[SplitScratch] = None) -> Histogram:
    """
    Count samples per (bin, class).

    Uses the two-level lookup when ``vectorized`` and the boundary count is
    255 or 63, binary search otherwise.
    """
    boundaries = np.asarray(boundaries, dtype=np.float64)
    n_bins = boundaries.shape[0] + 1
    if scratch is not None:
        counts = scratch.counts(n_bins)
    else:
        counts = np.zeros((n_bins, class_count), dtype=np.uint32)

    table = TwoLevelTable.from_boundaries(boundaries) if vectorized else None
    if table is not None:
        kernels.fill_histogram_two_level(table.coarse, table.fine, table.n_boundaries,
                                         values, labels_at, counts)
    else:
        kernels.fill_histogram_scalar(boundaries, values, labels_at, counts)
    return Histogram(boundaries=boundaries, counts=counts)


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis."""
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide='ignore', invalid='ignore'):
        p = np.where(total > 0, counts / total, 0.0)
    return entr(p).sum(axis=-1) / _LOG2


def entropy(counts) -> float:
    """Shannon entropy (bits) of a per-class count vector; 0 when empty or pure."""
    return float(_entropy_rows(np.asarray(counts, dtype=np.float64)))


def _split_gains(left: np.ndarray, parent: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Information gain of every candidate cut given cumulative left counts."""
    right = parent[None, :] - left
    n = parent.sum()
    n_left = left.sum(axis=1)
    n_right = n - n_left
    gains = (entropy(parent)
             - (n_left / n) * _entropy_rows(left)
             - (n_right / n) * _entropy_rows(right))
    return gains, n_left, n_right


def _pick_best(gains: np.ndarray, n_left: np.ndarray, n_right: np.ndarray) -> Optional[int]:
    """First (lowest-threshold) cut within tie tolerance of the best valid gain."""
    valid = (n_left > 0) & (n_right > 0)
    if not valid.any():
        return None
    scored = np.where(valid, gains, -np.inf)
    best = scored.max()
    if best <= MIN_GAIN:
        return None
    return int(np.argmax(scored >= best - GAIN_TIE_TOLERANCE))


def best_split_histogram(hist: Histogram, projection_index: int) -> Optional[SplitCandidate]:
    """
    Best boundary of a histogram by information gain.

    Boundary i sends bins 0..i left. Ties go to the smallest boundary.
    """
    if hist.boundaries.shape[0] == 0:
        return None
    counts = hist.counts.astype(np.float64)
    parent = counts.sum(axis=0)
    left = np.cumsum(counts, axis=0)[:-1]
    gains, n_left, n_right = _split_gains(left, parent)
    i = _pick_best(gains, n_left, n_right)
    if i is None:
        return None
    return SplitCandidate(
        projection_index=projection_index,
        threshold=float(hist.boundaries[i]),
        gain=max(float(gains[i]), 0.0),
        left_count=int(n_left[i]),
        right_count=int(n_right[i]),
    )


def recount_under_routing(candidate: SplitCandidate, values: np.ndarray, labels_at: np.ndarray,
                          class_count: int) -> Optional[SplitCandidate]:
    """
    Restate a histogram candidate for the routing rule (value <= threshold goes left).

    Bins send a value equal to a boundary right while routing sends it left.
    The two only disagree when a midpoint collapsed onto the lower of two
    adjacent float64 values; then counts and gain are taken from the routed
    partition, and None is returned if that partition no longer splits.
    """
    if values.dtype.itemsize < 8:
        # midpoints of narrower values are exact in float64
        return candidate
    wide = values.astype(np.float64)
    if not np.any(wide == candidate.threshold):
        return candidate
    go_left = wide <= candidate.threshold
    parent = np.bincount(labels_at, minlength=class_count).astype(np.float64)
    left = np.bincount(labels_at[go_left], minlength=class_count).astype(np.float64)
    gains, n_left, n_right = _split_gains(left[None, :], parent)
    if n_right[0] == 0 or gains[0] <= MIN_GAIN:
        return None
    return replace(candidate, gain=float(gains[0]), left_count=int(n_left[0]),
                   right_count=int(n_right[0]))


def best_split_exact(values: np.ndarray, labels_at: np.ndarray, projection_index: int,
                     class_count: Optional[int] = None) -> Optional[SplitCandidate]:
    """
    Best cut over every midpoint between consecutive distinct sorted values.

    Ties go to the smallest threshold.
    """
    n = values.shape[0]
    if n < 2:
        return None
    if class_count is None:
        class_count = int(labels_at.max()) + 1

    order = np.argsort(values, kind='stable')
    sorted_values = values[order]
    cuts = np.flatnonzero(sorted_values[:-1] < sorted_values[1:])
    if cuts.shape[0] == 0:
        return None

    onehot = np.zeros((n, class_count), dtype=np.float64)
    onehot[np.arange(n), labels_at[order]] = 1.0
    cumulative = np.cumsum(onehot, axis=0)
    gains, n_left, n_right = _split_gains(cumulative[cuts], cumulative[-1])
    i = _pick_best(gains, n_left, n_right)
    if i is None:
        return None
    cut = cuts[i]
    threshold = _midpoints(sorted_values[cut:cut + 1], sorted_values[cut + 1:cut + 2])[0]
    return SplitCandidate(
        projection_index=projection_index,
        threshold=float(threshold),
        gain=max(float(gains[i]), 0.0),
        left_count=int(n_left[i]),
        right_count=int(n_right[i]),
    )


def choose_method(n_active: int, breakeven: int) -> SplitMethod:
    """Histograms above the breakeven cardinality, sorting at or below it."""
    if breakeven < 1:
        raise ValueError(f"breakeven must be at least 1, got {breakeven}")
    return SplitMethod.HISTOGRAM if n_active > breakeven else SplitMethod.EXACT


def find_node_split(dataset: ColumnarDataset, active: SampleIndexSet,
                    projections: ProjectionMatrix, method: SplitMethod,
                    rng: np.random.Generator, *, bin_count: int = DEFAULT_BIN_COUNT,
                    vectorized: bool = True, scratch: Optional[SplitScratch] = None,
                    phases=None, depth: int = 0) -> Optional[Tuple[SplitCandidate, SparseRow]]:
    """
    Evaluate every nonempty projection row and keep the best split.

    Args:
        dataset: Training table
        active: Samples at this node
        projections: Candidate oblique features
        method: Exact sorting or histogram splitting
        rng: Node random source (boundary sampling)
        phases: Optional PhaseTiming receiving per-phase seconds

    Returns:
        (best candidate, its projection row), or None if nothing splits.
        Ties across projections go to the lowest projection index.
    """
    labels_at = dataset.labels[active.indices]
    class_count = dataset.class_count
    buffer = scratch.projected(len(active)) if scratch is not None else None

    best: Optional[SplitCandidate] = None
    best_row: Optional[SparseRow] = None
    for index in range(projections.num_rows):
        row = projections.row(index)
        if len(row) == 0:
            continue

        t0 = perf_counter()
        values = apply_projection(dataset, row, active, out=buffer)
        t1 = perf_counter()
        if method is SplitMethod.EXACT:
            candidate = best_split_exact(values, labels_at, index, class_count)
            t2 = t1
        else:
            boundaries = sample_boundaries(values, bin_count, rng)
            if boundaries.shape[0] == 0:
                candidate = None
                t2 = perf_counter()
            else:
                hist = build_histogram(values, labels_at, boundaries, class_count,
                                       vectorized=vectorized, scratch=scratch)
                t2 = perf_counter()
                candidate = best_split_histogram(hist, index)
                if candidate is not None:
                    candidate = recount_under_routing(candidate, values, labels_at, class_count)
        t3 = perf_counter()
        if phases is not None:
            phases.add('apply_projection', depth, t1 - t0)
            phases.add('build_histogram', depth, t2 - t1)
            phases.add('evaluate_splits', depth, t3 - t2)

        if candidate is not None and (best is None
                                      or candidate.gain > best.gain + GAIN_TIE_TOLERANCE):
            best, best_row = candidate, row

    if best is None:
        return None
    return best, best_row
