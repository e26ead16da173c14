"""Descriptive statistics over plain sequences."""
import math


def mean(values):
    """Arithmetic mean using compensated summation.

    Raises
    ------
    ValueError
        If ``values`` is empty.

    Examples
    --------
    >>> mean([1, 2, 3, 4])
    2.5
    """
    values = list(values)
    if not values:
        raise ValueError("mean of empty data")
    return math.fsum(values) / len(values)


def median(values):
    """Middle value of the sorted data.

    For an even number of points the mean of the two middle values is
    returned, so the result may not be a member of the data.

    Raises
    ------
    ValueError
        If ``values`` is empty.
    """
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of empty data")
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def quantile(values, q, method="linear"):
    """Quantile of the data at fraction ``q``.

    Parameters
    ----------
    values : sequence of float
    q : float
        Fraction in [0, 1].
    method : {'linear', 'lower', 'higher', 'nearest'}
        Interpolation between the two closest ranks. ``linear`` matches the
        default of most numerical libraries.

    Raises
    ------
    ValueError
        On empty data or ``q`` outside [0, 1].
    """
    ordered = sorted(values)
    if not ordered:
        raise ValueError("quantile of empty data")
    if not 0 <= q <= 1:
        raise ValueError("q must be within [0, 1]")
    pos = q * (len(ordered) - 1)
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    if method == "lower":
        return ordered[lo]
    if method == "higher":
        return ordered[hi]
    if method == "nearest":
        return ordered[int(round(pos))]
    frac = pos - lo
    return ordered[lo] + (ordered[hi] - ordered[lo]) * frac


def variance(values, sample=True):
    """Variance of the data.

    Parameters
    ----------
    values : sequence of float
    sample : bool
        Divide by ``n - 1`` (unbiased sample estimate) when true and by ``n``
        (population variance) otherwise.

    Raises
    ------
    ValueError
        With fewer than two points for a sample, or none for a population.
    """
    values = list(values)
    n = len(values)
    if n < (2 if sample else 1):
        raise ValueError("not enough data for variance")
    m = mean(values)
    total = math.fsum((v - m) ** 2 for v in values)
    return total / (n - 1 if sample else n)


def stdev(values, sample=True):
    """Standard deviation, the square root of :func:`variance`.

    Parameters
    ----------
    values : sequence of float
    sample : bool
        See :func:`variance`.
    """
    return math.sqrt(variance(values, sample))


def covariance(xs, ys):
    """Sample covariance of two equally long sequences.

    Raises
    ------
    ValueError
        If the lengths differ or fewer than two pairs are given.

    See Also
    --------
    correlation : covariance normalized by both standard deviations.
    """
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("covariance needs two equal sequences of length >= 2")
    mx = mean(xs)
    my = mean(ys)
    return math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (len(xs) - 1)


def correlation(xs, ys):
    """Pearson correlation coefficient.

    Returns
    -------
    float
        A value in [-1, 1].

    Raises
    ------
    ValueError
        If either input is constant, which leaves the coefficient
        undefined.
    """
    sx = stdev(xs)
    sy = stdev(ys)
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for constant input")
    return covariance(xs, ys) / (sx * sy)


def linear_fit(xs, ys):
    """Ordinary least-squares line through the points.

    Parameters
    ----------
    xs, ys : sequence of float

    Returns
    -------
    dict
        ``slope``, ``intercept`` and the coefficient of determination
        ``r2``. A perfectly flat ``ys`` reports ``r2`` as 1.0.
    """
    xs = list(xs)
    ys = list(ys)
    slope = covariance(xs, ys) / variance(xs)
    intercept = mean(ys) - slope * mean(xs)
    residuals = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    ss_res = math.fsum(r * r for r in residuals)
    my = mean(ys)
    ss_tot = math.fsum((y - my) ** 2 for y in ys)
    r2 = 1 - ss_res / ss_tot if ss_tot else 1.0
    return {"slope": slope, "intercept": intercept, "r2": r2}


def moving_average(values, window):
    """Simple moving average over a sliding window.

    The output has ``len(values) - window + 1`` points; the first full
    window produces the first value.

    Raises
    ------
    ValueError
        If ``window`` is not positive.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    out = []
    total = 0.0
    buf = []
    for v in values:
        buf.append(v)
        total += v
        if len(buf) > window:
            total -= buf.pop(0)
        if len(buf) == window:
            out.append(total / window)
    return out


def exponential_smoothing(values, alpha=0.5):
    """Single exponential smoothing.

    Each output is ``alpha * value + (1 - alpha) * previous``, seeded with
    the first value.

    Parameters
    ----------
    values : iterable of float
    alpha : float
        Smoothing factor in (0, 1]; larger values track the input closely.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    out = []
    level = None
    for v in values:
        level = v if level is None else alpha * v + (1 - alpha) * level
        out.append(level)
    return out


def zscores(values):
    """Standard scores of each value.

    Constant input yields zeros rather than dividing by a zero standard
    deviation.

    Returns
    -------
    list of float
    """
    values = list(values)
    m = mean(values)
    s = stdev(values)
    if s == 0:
        return [0.0 for _ in values]
    return [(v - m) / s for v in values]


def outliers(values, threshold=3.0):
    """Values whose absolute standard score exceeds ``threshold``.

    Parameters
    ----------
    values : sequence of float
    threshold : float
        Cut-off in standard deviations; three is a common choice for roughly
        normal data.
    """
    values = list(values)
    scores = zscores(values)
    return [v for v, z in zip(values, scores) if abs(z) > threshold]


def summarize(values):
    """Descriptive summary of the data.

    Returns
    -------
    dict
        ``count``, ``min``, ``max``, ``mean``, ``median`` and ``p90``, plus
        ``stdev`` when there are at least two points. Empty input returns
        only ``count``.
    """
    values = list(values)
    if not values:
        return {"count": 0}
    result = {
        "count": len(values),
        "min": min(values),
        "max": max(values),
        "mean": mean(values),
        "median": median(values),
        "p90": quantile(values, 0.9),
    }
    if len(values) > 1:
        result["stdev"] = stdev(values)
    return result


def bucketize(values, edges):
    """Count values per interval defined by sorted ``edges``.

    Bucket ``i`` holds values in ``[edges[i-1], edges[i])``, with open
    buckets below the first edge and at or above the last, so the result
    has ``len(edges) + 1`` counts.
    """
    edges = sorted(edges)
    counts = [0] * (len(edges) + 1)
    for v in values:
        lo = 0
        hi = len(edges)
        while lo < hi:
            mid = (lo + hi) // 2
            if v < edges[mid]:
                hi = mid
            else:
                lo = mid + 1
        counts[lo] += 1
    return counts
