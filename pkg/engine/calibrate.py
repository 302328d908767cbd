"""Startup microbenchmark locating the sort-vs-histogram breakeven."""

import logging
import math
import warnings
from dataclasses import dataclass, field
from statistics import median
from time import perf_counter
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import kernels
from .config_builder import DEFAULT_BREAKEVEN
from .split import best_split_exact, best_split_histogram, build_histogram, sample_boundaries

logger = logging.getLogger(__name__)

Probe = Callable[[int], float]

DEFAULT_RANGE = (64, 65536)
DEFAULT_BUDGET = 0.1
DEFAULT_REPETITIONS = 5
# size multiplier while no win has been measured
GROWTH = 4


@dataclass(frozen=True)
class CalibrationSample:
    n: int
    exact_time: float
    histogram_time: float

    @property
    def histogram_wins(self) -> bool:
        return self.histogram_time <= self.exact_time


@dataclass
class CrossoverCalibration:
    """Measured breakeven and the samples it was derived from."""
    breakeven_n: int
    samples: List[CalibrationSample] = field(default_factory=list)
    budget: float = DEFAULT_BUDGET
    fallback: bool = False

    def to_dict(self) -> Dict:
        return {
            'breakeven_n': self.breakeven_n,
            'samples': [[s.n, s.exact_time, s.histogram_time] for s in self.samples],
            'budget': self.budget,
            'fallback': self.fallback,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'CrossoverCalibration':
        return cls(
            breakeven_n=int(data['breakeven_n']),
            samples=[CalibrationSample(int(n), float(e), float(h)) for n, e, h in data['samples']],
            budget=float(data['budget']),
            fallback=bool(data.get('fallback', False)),
        )


def calibrate_crossover(time_exact: Probe, time_histogram: Probe,
                        n_min: int = DEFAULT_RANGE[0], n_max: int = DEFAULT_RANGE[1],
                        budget: float = DEFAULT_BUDGET,
                        repetitions: int = DEFAULT_REPETITIONS) -> CrossoverCalibration:
    """
    Search for the smallest n at which histogram splitting is no slower than sorting.

    The search starts at n_min and grows n geometrically until histograms
    win, then bisects (geometric midpoints) between the last loss and the
    first win. Every measurement is the median of up to ``repetitions``
    calls; the first runs once, later ones size their repetition count from
    the worst seconds-per-sample seen so far, and a size whose predicted cost
    exceeds the remaining budget is not measured. The search assumes the two
    cost curves cross once.

    Args:
        time_exact: Duration of exact splitting at cardinality n
        time_histogram: Duration of histogram splitting at cardinality n
        n_min: Lower end of the search range
        n_max: Upper end of the search range
        budget: Wall-clock budget in seconds

    Returns:
        CrossoverCalibration; breakeven is n_min if histograms always win,
        n_max + 1 if they never do. If the budget runs out before a loss and
        a win were both measured, the fallback is 1024 (raised above any
        measured loss) with a warning.

    Raises:
        ValueError: If n_min < 1 or n_min >= n_max
    """
    if n_min < 1 or n_min >= n_max:
        raise ValueError(f"Need 1 <= n_min < n_max, got [{n_min}, {n_max}]")

    start = perf_counter()
    deadline = start + budget
    samples: List[CalibrationSample] = []
    seconds_per_sample = [0.0]

    def measure(n: int) -> Optional[CalibrationSample]:
        remaining = deadline - perf_counter()
        if remaining <= 0:
            return None
        reps = 1
        if seconds_per_sample[0] > 0:
            predicted = seconds_per_sample[0] * n
            if predicted > remaining:
                return None
            # leave half the remaining budget for the sizes that follow
            reps = max(1, min(repetitions, int(remaining / (2 * predicted))))
        t0 = perf_counter()
        exact = median(time_exact(n) for _ in range(reps))
        hist = median(time_histogram(n) for _ in range(reps))
        seconds_per_sample[0] = max(seconds_per_sample[0], (perf_counter() - t0) / (reps * n))
        sample = CalibrationSample(n, exact, hist)
        samples.append(sample)
        logger.debug("calibration n=%d exact=%.3g hist=%.3g (%d reps)", n, exact, hist, reps)
        return sample

    first = measure(n_min)
    if first is None:
        return _fallback(samples, budget)
    if first.histogram_wins:
        return CrossoverCalibration(n_min, samples, budget)

    lo, hi = n_min, None   # histogram loses at lo, wins at hi
    while hi is None and lo < n_max:
        n = min(lo * GROWTH, n_max)
        sample = measure(n)
        if sample is None:
            return _fallback(samples, budget, lo)
        if sample.histogram_wins:
            hi = n
        else:
            lo = n
    if hi is None:
        return CrossoverCalibration(n_max + 1, samples, budget)

    while hi - lo > 1:
        mid = int(round(math.sqrt(lo * hi)))
        mid = min(max(mid, lo + 1), hi - 1)
        sample = measure(mid)
        if sample is None:
            break
        if sample.histogram_wins:
            hi = mid
        else:
            lo = mid

    logger.info("Calibrated breakeven n=%d (loss at %d) from %d samples in %.1f ms",
                hi, lo, len(samples), 1e3 * (perf_counter() - start))
    return CrossoverCalibration(hi, samples, budget)


def _fallback(samples: List[CalibrationSample], budget: float,
              largest_loss: int = 0) -> CrossoverCalibration:
    breakeven = max(DEFAULT_BREAKEVEN, largest_loss + 1)
    message = (f"Calibration budget of {budget:.3f}s exhausted before the timings crossed; "
               f"using default breakeven {breakeven}")
    logger.warning(message)
    warnings.warn(message, UserWarning)
    return CrossoverCalibration(breakeven, samples, budget, fallback=True)


def make_split_probes(bin_count: int = 256, class_count: int = 2, seed: int = 0,
                      vectorized: bool = True, dtype=np.float32) -> Tuple[Probe, Probe]:
    """
    Timing probes running the real split paths on synthetic Gaussian nodes.

    Kernels are compiled here, before any budget starts counting.
    """
    kernels.warm_up()
    rng = np.random.default_rng(seed)
    cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def node(n: int) -> Tuple[np.ndarray, np.ndarray]:
        if n not in cache:
            labels = np.arange(n, dtype=np.intp) % class_count
            values = (rng.standard_normal(n) + labels).astype(dtype)
            cache[n] = (values, labels)
        return cache[n]

    def time_exact(n: int) -> float:
        values, labels = node(n)
        t0 = perf_counter()
        best_split_exact(values, labels, 0, class_count)
        return perf_counter() - t0

    def time_histogram(n: int) -> float:
        values, labels = node(n)
        t0 = perf_counter()
        boundaries = sample_boundaries(values, bin_count, rng)
        if boundaries.shape[0]:
            hist = build_histogram(values, labels, boundaries, class_count, vectorized=vectorized)
            best_split_histogram(hist, 0)
        return perf_counter() - t0

    # first calls pay one-time numpy/numba dispatch costs
    time_exact(256)
    time_histogram(1024)
    return time_exact, time_histogram
