"""Dataset loading and columnar storage for forest training."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

LabelColumn = Union[str, int]

EXCEL_SUFFIXES = ['.xlsx', '.xls', '.xlsm']


class DatasetError(ValueError):
    """Raised when a dataset file cannot be turned into a ColumnarDataset."""


@dataclass(frozen=True)
class SampleIndexSet:
    """Sorted, duplicate-free row indices reaching a tree node."""
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @classmethod
    def full(cls, n_samples: int) -> 'SampleIndexSet':
        return cls(np.arange(n_samples, dtype=np.intp))

    def validate(self, n_samples: int):
        """
        Check ordering and bounds against a dataset of n_samples rows.

        Raises:
            ValueError: If indices are not strictly increasing or out of range
        """
        idx = self.indices
        if idx.size and (idx[0] < 0 or idx[-1] >= n_samples):
            raise ValueError(f"Sample index out of range for {n_samples} samples")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("Sample indices must be strictly increasing")


@dataclass(frozen=True, eq=False)
class ColumnarDataset:
    """
    Feature-major numeric table plus integer class labels.

    ``columns`` has shape (n_features, n_samples): row f is the contiguous
    vector of feature f over all samples.
    """
    columns: np.ndarray
    labels: np.ndarray
    class_count: int
    label_names: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.columns.ndim != 2:
            raise ValueError("columns must be a 2-D feature-major array")
        n_features, n_samples = self.columns.shape
        if n_features < 1 or n_samples < 1:
            raise ValueError("Dataset needs at least one feature and one sample")
        if self.labels.shape != (n_samples,):
            raise ValueError(
                f"Expected {n_samples} labels, got {self.labels.shape[0]}"
            )
        if self.class_count < 2:
            raise DatasetError("fewer than 2 classes")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise ValueError(f"Labels must lie in [0, {self.class_count})")
        if not self.label_names:
            object.__setattr__(
                self, 'label_names', tuple(str(c) for c in range(self.class_count))
            )

    @property
    def n_features(self) -> int:
        return int(self.columns.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.columns.shape[1])

    @property
    def dtype(self) -> np.dtype:
        return self.columns.dtype

    def subset(self, indices: np.ndarray) -> 'ColumnarDataset':
        """Materialize the given rows as a new dataset (label mapping kept)."""
        return ColumnarDataset(
            columns=np.ascontiguousarray(self.columns[:, indices]),
            labels=self.labels[indices],
            class_count=self.class_count,
            label_names=self.label_names,
        )

    def row(self, i: int) -> np.ndarray:
        """Return sample i as a feature vector."""
        return self.columns[:, i].copy()


def _resolve_label_column(frame: pd.DataFrame, label_column: LabelColumn) -> str:
    if isinstance(label_column, str) and label_column not in frame.columns:
        if label_column.lstrip('-').isdigit():
            label_column = int(label_column)
        else:
            raise DatasetError(f"Label column '{label_column}' not found")
    if isinstance(label_column, int):
        try:
            return frame.columns[label_column]
        except IndexError:
            raise DatasetError(
                f"Label column index {label_column} out of range for "
                f"{len(frame.columns)} columns"
            )
    return label_column


def map_labels(raw: Sequence, label_names: Optional[Sequence[str]] = None
               ) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """
    Map raw label cells to contiguous class ids.

    Args:
        raw: Label cells in row order
        label_names: Known vocabulary (e.g. from a trained model); when given
            the ids follow it instead of first-appearance order

    Returns:
        (class ids, label names indexed by id)

    Raises:
        DatasetError: If a label is not in the known vocabulary
    """
    names = pd.Series(raw).astype(str).str.strip()
    if label_names is None:
        codes, uniques = pd.factorize(names, sort=False)
        return codes.astype(np.intp), tuple(str(u) for u in uniques)

    lookup = {name: i for i, name in enumerate(label_names)}
    unknown = sorted(set(names) - set(lookup))
    if unknown:
        raise DatasetError(f"Unknown labels not seen in training: {', '.join(unknown[:5])}")
    return names.map(lookup).to_numpy(dtype=np.intp), tuple(label_names)


def _frame_to_columns(frame: pd.DataFrame, dtype, row_offset: int) -> np.ndarray:
    """Parse every cell of a string frame as a finite real, feature-major."""
    columns = np.empty((frame.shape[1], frame.shape[0]), dtype=dtype)
    for j, name in enumerate(frame.columns):
        cells = frame[name]
        missing = cells.isna() | (cells.astype(str).str.strip() == '')
        if missing.any():
            row = int(np.flatnonzero(missing.to_numpy())[0]) + row_offset
            raise DatasetError(f"Ragged row {row}: missing value in column '{name}'")
        try:
            # float() parsing is correctly rounded, which keeps CSV round-trips exact
            parsed = cells.to_numpy(dtype=object).astype(np.float64)
        except ValueError:
            parsed = pd.to_numeric(cells, errors='coerce').to_numpy(dtype=np.float64)
        bad = ~np.isfinite(parsed)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DatasetError(
                f"Cannot parse cell at row {i + row_offset}, column '{name}': "
                f"{cells.iloc[i]!r} is not a finite number"
            )
        columns[j] = parsed
    return columns


def _build_dataset(frame: pd.DataFrame, label_column: LabelColumn, dtype,
                   label_names: Optional[Sequence[str]], row_offset: int) -> ColumnarDataset:
    if frame.shape[1] < 2:
        raise DatasetError("Dataset needs a label column and at least one feature column")
    if frame.shape[0] < 1:
        raise DatasetError("Dataset has no rows")
    # short rows come back padded with NaN
    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        raise DatasetError(f"Ragged row {int(np.flatnonzero(short)[0]) + row_offset}: missing fields")

    label_name = _resolve_label_column(frame, label_column)
    labels, names = map_labels(frame[label_name], label_names)
    if len(names) < 2:
        raise DatasetError("fewer than 2 classes")

    features = frame.drop(columns=[label_name])
    columns = _frame_to_columns(features, dtype, row_offset)
    return ColumnarDataset(columns=columns, labels=labels,
                           class_count=len(names), label_names=names)


def load_csv(path: str, label_column: LabelColumn = -1, has_header: bool = True,
             dtype=np.float32, label_names: Optional[Sequence[str]] = None) -> ColumnarDataset:
    """
    Load a comma-separated file into a ColumnarDataset.

    Args:
        path: Path to the CSV file
        label_column: Column name or position holding class labels
        has_header: Whether the first line holds column names
        dtype: Storage precision for feature values
        label_names: Known label vocabulary to map against

    Returns:
        ColumnarDataset with labels mapped to 0..class_count-1

    Raises:
        FileNotFoundError: If the file doesn't exist
        DatasetError: On parse failures, ragged rows or fewer than 2 classes
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    try:
        frame = pd.read_csv(file_path, header=0 if has_header else None, dtype=str,
                            keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise DatasetError(f"Ragged rows in {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise DatasetError(f"Empty dataset file: {path}") from exc

    # Data rows are reported 1-based as they appear in the file.
    row_offset = 2 if has_header else 1
    dataset = _build_dataset(frame, label_column, dtype, label_names, row_offset)
    logger.info("Loaded %s: %d samples, %d features, %d classes", path,
                dataset.n_samples, dataset.n_features, dataset.class_count)
    return dataset


def load_excel(path: str, label_column: LabelColumn = -1, sheet_name: Union[str, int] = 0,
               dtype=np.float32, label_names: Optional[Sequence[str]] = None) -> ColumnarDataset:
    """
    Load one worksheet of an Excel workbook into a ColumnarDataset.

    Raises:
        FileNotFoundError: If the file doesn't exist
        DatasetError: If the file is not a workbook or cells fail to parse
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    if file_path.suffix.lower() not in EXCEL_SUFFIXES:
        raise DatasetError(f"Invalid file format: {file_path.suffix}. Expected .xlsx, .xls, or .xlsm")

    try:
        frame = pd.read_excel(file_path, sheet_name=sheet_name, dtype=str)
    except Exception as exc:
        raise DatasetError(f"Failed to load sheet {sheet_name!r}: {exc}") from exc

    frame.columns = frame.columns.astype(str).str.strip()
    return _build_dataset(frame, label_column, dtype, label_names, row_offset=2)


def load_libsvm(path: str, n_features: int, dtype=np.float32,
                label_names: Optional[Sequence[str]] = None) -> ColumnarDataset:
    """
    Load a sparse "label idx:val" file with 1-based feature indices.

    Missing entries become 0.0.

    Raises:
        FileNotFoundError: If the file doesn't exist
        DatasetError: On malformed tokens or indices above n_features
    """
    from sklearn.datasets import load_svmlight_file

    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    try:
        matrix, raw_labels = load_svmlight_file(str(file_path), n_features=n_features,
                                                dtype=np.float64, zero_based=False)
    except ValueError as exc:
        raise DatasetError(f"Cannot parse libsvm file {path}: {exc}") from exc

    labels, names = map_labels([f"{v:g}" for v in raw_labels], label_names)
    if len(names) < 2:
        raise DatasetError("fewer than 2 classes")

    columns = np.ascontiguousarray(matrix.T.toarray(), dtype=dtype)
    return ColumnarDataset(columns=columns, labels=labels,
                           class_count=len(names), label_names=names)


def load_feature_matrix(path: str, has_header: bool = True, dtype=np.float32) -> np.ndarray:
    """
    Load an unlabeled CSV as a feature-major array of shape (n_features, n_samples).

    Raises:
        FileNotFoundError: If the file doesn't exist
        DatasetError: On parse failures
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        frame = pd.read_csv(file_path, header=0 if has_header else None, dtype=str,
                            keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise DatasetError(f"Ragged rows in {path}: {exc}") from exc
    return _frame_to_columns(frame, dtype, 2 if has_header else 1)


def write_csv(dataset: ColumnarDataset, path: str):
    """
    Write a dataset as CSV with header f0..f{d-1},label.

    Values use the shortest representation that parses back to the same
    stored value.
    """
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    data = {f"f{j}": [str(v) for v in col] for j, col in enumerate(dataset.columns)}
    data['label'] = [dataset.label_names[c] for c in dataset.labels]
    pd.DataFrame(data).to_csv(output_path, index=False)
    logger.info("Wrote %d rows to %s", dataset.n_samples, output_path)
