import numpy as np
from scipy.signal import savgol_filter as _savgol

from adaptiveGHX.utils.errors import ConfigError


def _edge_fit(block, position, poly_order):
    """Least-squares polynomial through the rows of block, evaluated at row `position`."""
    offsets = np.arange(block.shape[0], dtype=float) - position
    degree = min(poly_order, block.shape[0] - 1)
    return np.polyfit(offsets, block, degree)[-1]


def savgol_filter(series, window, poly_order):
    """
    Savitzky-Golay smoothing along the first axis.

    Interior points use the centred least-squares polynomial. Within window//2 of
    either end the window is truncated at the boundary and the polynomial is fitted
    to the remaining samples only (degree capped at their count - 1), so nothing is
    padded or extrapolated.
    Args:
        series: (N,) or (N, n) samples on a uniform grid
        window: odd window length, > poly_order and <= N
        poly_order: degree of the local polynomial
    """
    data = np.asarray(series, dtype=float)
    if window % 2 != 1 or window < 1:
        raise ConfigError(f"window must be a positive odd count, got {window}", key="window")
    if poly_order < 0 or window <= poly_order:
        raise ConfigError(
            f"window ({window}) must exceed poly_order ({poly_order})", key="poly_order"
        )
    if data.shape[0] < window:
        raise ConfigError(
            f"series has {data.shape[0]} samples, fewer than the window ({window})",
            key="window",
        )
    smoothed = _savgol(data, window, poly_order, axis=0, mode="interp")
    half = window // 2
    count = data.shape[0]
    for i in range(min(half, count)):
        smoothed[i] = _edge_fit(data[: i + half + 1], i, poly_order)
        j = count - 1 - i
        tail = data[j - half :]
        smoothed[j] = _edge_fit(tail, half, poly_order)
    return smoothed
