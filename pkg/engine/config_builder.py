"""Configuration builder for forest training."""

import warnings
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Dict, Optional, Tuple

TWO_LEVEL_BIN_COUNTS = (64, 256)
DEFAULT_BREAKEVEN = 1024


class SplitMode(Enum):
    """Which split finder a tree may use."""
    EXACT_ONLY = 'exact'
    HISTOGRAM_ONLY = 'hist'
    DYNAMIC = 'dynamic'


@dataclass
class TrainConfig:
    """Complete configuration for forest training."""

    # Forest
    n_trees: int = 240
    seed: int = 0
    n_workers: Optional[int] = None   # None = all cores
    bootstrap_fraction: float = 0.632

    # Tree growth
    max_depth: Optional[int] = None   # None = train to purity
    min_samples: int = 2
    max_split_retries: int = 1

    # Split finding
    split_mode: SplitMode = SplitMode.DYNAMIC
    bin_count: int = 256
    breakeven: Optional[int] = None   # None = calibrate at startup
    vectorized_binning: bool = True

    # Startup calibration
    calibration_budget: float = 0.1   # seconds
    calibration_range: Tuple[int, int] = (64, 65536)

    def validate(self) -> 'TrainConfig':
        """
        Check invariants.

        Returns:
            self, for chaining

        Raises:
            ValueError: If any field is out of range
        """
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.bin_count < 2:
            raise ValueError(f"bin_count must be at least 2, got {self.bin_count}")
        if not 0.0 < self.bootstrap_fraction <= 1.0:
            raise ValueError(f"bootstrap_fraction must be in (0, 1], got {self.bootstrap_fraction}")
        if self.min_samples < 2:
            raise ValueError(f"min_samples must be at least 2, got {self.min_samples}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError(f"max_depth must be non-negative, got {self.max_depth}")
        if self.max_split_retries < 0:
            raise ValueError(f"max_split_retries must be non-negative, got {self.max_split_retries}")
        if self.breakeven is not None and self.breakeven < 1:
            raise ValueError(f"breakeven must be at least 1, got {self.breakeven}")
        if self.n_workers is not None and self.n_workers == 0:
            raise ValueError("n_workers must be non-zero")
        low, high = self.calibration_range
        if not 1 <= low < high:
            raise ValueError(f"Invalid calibration range {self.calibration_range}")

        if (self.vectorized_binning and self.split_mode is not SplitMode.EXACT_ONLY
                and self.bin_count not in TWO_LEVEL_BIN_COUNTS):
            warnings.warn(
                f"Two-level binning is unavailable at {self.bin_count} bins; "
                f"scalar binary search fallback used",
                UserWarning,
            )
        return self

    def resolved_breakeven(self) -> int:
        """Breakeven to dispatch on, falling back to the documented default."""
        return self.breakeven if self.breakeven is not None else DEFAULT_BREAKEVEN

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data['split_mode'] = self.split_mode.value
        data['calibration_range'] = list(self.calibration_range)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        """Rebuild a configuration from ``to_dict`` output."""
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        if 'split_mode' in kwargs:
            kwargs['split_mode'] = SplitMode(kwargs['split_mode'])
        if 'calibration_range' in kwargs:
            kwargs['calibration_range'] = tuple(kwargs['calibration_range'])
        return cls(**kwargs)
