"""Per-worker timing accumulators filled during tree training."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

PHASES = ('sample_projection', 'apply_projection', 'build_histogram', 'evaluate_splits')
DEPTH_BUCKETS = ('0-4', '5-9', '10-14', '15+')


def depth_bucket(depth: int) -> str:
    return DEPTH_BUCKETS[min(depth // 5, len(DEPTH_BUCKETS) - 1)]


@dataclass
class DepthStats:
    seconds: float = 0.0
    nodes: int = 0
    samples: int = 0


@dataclass
class DepthTiming:
    """Node work per (depth, method); method is 'exact', 'histogram' or 'leaf'."""
    entries: Dict[Tuple[int, str], DepthStats] = field(default_factory=dict)

    def record(self, depth: int, method: str, seconds: float, n_active: int):
        stats = self.entries.setdefault((depth, method), DepthStats())
        stats.seconds += seconds
        stats.nodes += 1
        stats.samples += n_active

    def merge(self, other: 'DepthTiming'):
        for key, stats in other.entries.items():
            mine = self.entries.setdefault(key, DepthStats())
            mine.seconds += stats.seconds
            mine.nodes += stats.nodes
            mine.samples += stats.samples

    @property
    def max_depth(self) -> int:
        return max((d for d, _ in self.entries), default=-1)

    def per_depth(self) -> List[Tuple[int, float, int, int]]:
        """(depth, seconds, nodes, samples) summed over methods, depth 0..max."""
        rows = []
        for depth in range(self.max_depth + 1):
            seconds = nodes = samples = 0
            for (d, _), stats in self.entries.items():
                if d == depth:
                    seconds += stats.seconds
                    nodes += stats.nodes
                    samples += stats.samples
            rows.append((depth, float(seconds), nodes, samples))
        return rows

    @property
    def total_seconds(self) -> float:
        return sum(s.seconds for s in self.entries.values())


@dataclass
class PhaseTiming:
    """Seconds per (phase, depth bucket)."""
    seconds: Dict[Tuple[str, str], float] = field(default_factory=dict)

    def add(self, phase: str, depth: int, seconds: float):
        key = (phase, depth_bucket(depth))
        self.seconds[key] = self.seconds.get(key, 0.0) + seconds

    def merge(self, other: 'PhaseTiming'):
        for key, value in other.seconds.items():
            self.seconds[key] = self.seconds.get(key, 0.0) + value

    def total(self, phase: Optional[str] = None) -> float:
        return sum(v for (p, _), v in self.seconds.items() if phase is None or p == phase)


@dataclass
class TrainingProfile:
    """Everything one worker measured; merged after training."""
    depth: DepthTiming = field(default_factory=DepthTiming)
    phases: PhaseTiming = field(default_factory=PhaseTiming)
    split_seconds: float = 0.0

    def merge(self, other: 'TrainingProfile'):
        self.depth.merge(other.depth)
        self.phases.merge(other.phases)
        self.split_seconds += other.split_seconds
