"""Tiny descriptive statistics."""


def mean(xs):
    return sum(xs) / len(xs)


def spread(xs):
    m = mean(xs)
    return (sum((x - m) ** 2 for x in xs) / len(xs)) ** 0.5


def summarize(xs):
    if not xs:
        return None
    return {
        "mean": round(mean(xs), 6),
        "spread": round(spread(xs), 6),
        "range": [min(xs), max(xs)],
    }
