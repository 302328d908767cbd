"""Compiled inner loops for bin lookup and histogram filling.

Bin index convention: the number of boundaries <= v, so a value equal to a
boundary lands in the bin to its right.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def upper_bound(boundaries, v):
    """Binary search: count of boundaries <= v."""
    lo = 0
    hi = boundaries.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if boundaries[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def two_level_lookup(coarse, fine, n_boundaries, v):
    """Coarse compare selects the group, fine compare the bin inside it."""
    width = coarse.shape[0]
    group = 0
    for j in range(width):
        if coarse[j] <= v:
            group += 1
    if group > width - 1:
        group = width - 1
    local = 0
    for j in range(width):
        if fine[group, j] <= v:
            local += 1
    b = group * width + local
    # only reachable for v = +inf, which would count the padding
    if b > n_boundaries:
        b = n_boundaries
    return b


@njit(cache=True, nogil=True)
def bin_indices_scalar(boundaries, values, out):
    for i in range(values.shape[0]):
        out[i] = upper_bound(boundaries, values[i])


@njit(cache=True, nogil=True)
def bin_indices_two_level(coarse, fine, n_boundaries, values, out):
    for i in range(values.shape[0]):
        out[i] = two_level_lookup(coarse, fine, n_boundaries, values[i])


@njit(cache=True, nogil=True)
def fill_histogram_scalar(boundaries, values, labels, counts):
    for i in range(values.shape[0]):
        counts[upper_bound(boundaries, values[i]), labels[i]] += 1


@njit(cache=True, nogil=True)
def fill_histogram_two_level(coarse, fine, n_boundaries, values, labels, counts):
    for i in range(values.shape[0]):
        counts[two_level_lookup(coarse, fine, n_boundaries, values[i]), labels[i]] += 1


@njit(cache=True, nogil=True)
def successor_values(chosen, values):
    """
    For each sorted chosen value, the smallest element of values above it.

    Every chosen value must occur in values and be below values.max().
    """
    k = chosen.shape[0]
    succ = np.full(k, np.inf)
    for i in range(values.shape[0]):
        v = values[i]
        # index of the largest chosen value strictly below v
        lo = 0
        hi = k
        while lo < hi:
            mid = (lo + hi) >> 1
            if chosen[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        j = lo - 1
        if j >= 0 and v < succ[j]:
            succ[j] = v
    return succ


def warm_up():
    """Compile the kernels for the dtypes training uses."""
    boundaries = np.array([0.5], dtype=np.float64)
    coarse = np.array([0.5] + [np.inf] * 7, dtype=np.float64)
    fine = np.full((8, 8), np.inf)
    fine[0, 0] = 0.5
    labels = np.zeros(2, dtype=np.intp)
    counts = np.zeros((2, 2), dtype=np.uint32)
    out = np.zeros(2, dtype=np.intp)
    for dtype in (np.float32, np.float64):
        values = np.array([0.0, 1.0], dtype=dtype)
        fill_histogram_scalar(boundaries, values, labels, counts)
        fill_histogram_two_level(coarse, fine, 1, values, labels, counts)
        bin_indices_scalar(boundaries, values, out)
        bin_indices_two_level(coarse, fine, 1, values, out)
    successor_values(np.array([0.0]), np.array([0.0, 1.0]))
