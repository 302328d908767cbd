"""Sparse random projection sampling and projected-feature materialization."""

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from utils.dataset_reader import ColumnarDataset, SampleIndexSet


@dataclass(frozen=True)
class ProjectionConfig:
    """Shape and density of the per-node projection matrix."""
    n_features: int
    num_projections: int
    expected_total_nonzeros: int
    cell_density: float

    @classmethod
    def for_features(cls, n_features: int) -> 'ProjectionConfig':
        """
        Default sizing: ceil(1.5*sqrt(d)) rows and round(3*sqrt(d)) expected nonzeros.

        Raises:
            ValueError: If n_features < 1
        """
        if n_features < 1:
            raise ValueError(f"n_features must be at least 1, got {n_features}")
        root = math.sqrt(n_features)
        num_projections = max(1, math.ceil(1.5 * root))
        nonzeros = max(1, round(3.0 * root))
        density = min(1.0, nonzeros / (num_projections * n_features))
        return cls(n_features, num_projections, nonzeros, density)

    def __post_init__(self):
        if self.num_projections < 1:
            raise ValueError("num_projections must be at least 1")
        if not 0.0 < self.cell_density <= 1.0:
            raise ValueError(f"cell_density must be in (0, 1], got {self.cell_density}")

    @property
    def n_cells(self) -> int:
        return self.num_projections * self.n_features


@dataclass(frozen=True, eq=False)
class SparseRow:
    """One candidate oblique feature: parallel arrays of feature indices and weights."""
    features: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return zip(self.features.tolist(), self.weights.tolist())

    def as_pairs(self) -> Tuple[Tuple[int, float], ...]:
        return tuple(self)

    def negated(self) -> 'SparseRow':
        return SparseRow(self.features, -self.weights)


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Projection rows stored CSR-style; row i spans indptr[i]:indptr[i+1]."""
    indptr: np.ndarray
    features: np.ndarray
    weights: np.ndarray

    @property
    def num_rows(self) -> int:
        return int(self.indptr.shape[0] - 1)

    @property
    def nnz(self) -> int:
        return int(self.features.shape[0])

    def row(self, i: int) -> SparseRow:
        start, stop = self.indptr[i], self.indptr[i + 1]
        return SparseRow(self.features[start:stop], self.weights[start:stop])

    @property
    def rows(self) -> List[SparseRow]:
        return [self.row(i) for i in range(self.num_rows)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectionMatrix):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.weights, other.weights))


def sample_projection_matrix(config: ProjectionConfig,
                             rng: np.random.Generator) -> ProjectionMatrix:
    """
    Sample a sparse +/-1 projection matrix.

    The total nonzero count comes from one Binomial(rows*d, density) variate,
    which has the same distribution as testing every cell independently. The
    cells are then placed uniformly without replacement (numpy's subset
    sampler uses Floyd's algorithm when the grid is large relative to the
    draw), so a row never holds the same feature twice.

    Args:
        config: Matrix shape and density
        rng: Random source owned by the calling worker

    Returns:
        ProjectionMatrix whose rows list features in increasing order
    """
    n_cells = config.n_cells
    total = int(rng.binomial(n_cells, config.cell_density))
    cells = np.sort(rng.choice(n_cells, size=total, replace=False, shuffle=False))
    signs = rng.integers(0, 2, size=total)
    weights = np.where(signs == 1, 1.0, -1.0)

    row_of_cell = cells // config.n_features
    indptr = np.zeros(config.num_projections + 1, dtype=np.intp)
    np.cumsum(np.bincount(row_of_cell, minlength=config.num_projections), out=indptr[1:])
    features = (cells % config.n_features).astype(np.intp)
    return ProjectionMatrix(indptr=indptr, features=features, weights=weights)


def project_columns(columns: np.ndarray, row, sample_indices: np.ndarray,
                    out: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Weighted sum of the row's feature columns over the selected samples.

    Sums accumulate in float64 in row order and are returned in the column
    precision. Prediction reproduces the same arithmetic sample by sample.

    Args:
        columns: Feature-major values, shape (n_features, n_samples)
        row: Iterable of (feature_index, weight) pairs
        sample_indices: Rows to project, in output order
        out: Optional float64 accumulator of at least len(sample_indices)
    """
    n = sample_indices.shape[0]
    acc = np.zeros(n, dtype=np.float64) if out is None else out[:n]
    if out is not None:
        acc.fill(0.0)
    for feature, weight in row:
        acc += np.multiply(columns[feature, sample_indices], weight, dtype=np.float64)
    return acc.astype(columns.dtype)


def apply_projection(dataset: ColumnarDataset, row, active: SampleIndexSet,
                     out: Optional[np.ndarray] = None) -> np.ndarray:
    """Materialize one projected (oblique) feature over the active samples."""
    return project_columns(dataset.columns, row, active.indices, out=out)
