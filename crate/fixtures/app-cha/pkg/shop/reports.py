"""Back-office reports over order histories."""
from shop.models import Money

MONTHS = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]


def monthly_revenue(orders, currency="EUR"):
    buckets = {}
    for order in orders:
        month = order.get("month", 1)
        if not 1 <= month <= 12:
            raise ValueError("bad month %r" % (month,))
        buckets.setdefault(month, Money(0, currency))
        buckets[month] = buckets[month] + Money(order.get("cents", 0), currency)
    rows = []
    running = Money(0, currency)
    best = None
    for month in range(1, 13):
        value = buckets.get(month, Money(0, currency))
        running = running + value
        if best is None or best[1] < value:
            best = (month, value)
        bar = "#" * min(50, value.cents // 1000)
        rows.append("%s %10d %10d %s" % (MONTHS[month - 1], value.cents, running.cents, bar))
    rows.append("")
    if best is not None:
        rows.append("best month: %s with %d" % (MONTHS[best[0] - 1], best[1].cents))
    average = running.cents / 12.0
    rows.append("average per month: %.2f" % average)
    above = [MONTHS[m - 1] for m in range(1, 13) if buckets.get(m, Money(0, currency)).cents > average]
    rows.append("above average: %s" % (", ".join(above) if above else "none"))
    return "\n".join(rows)


def top_customers(orders, limit=5):
    totals = {}
    counts = {}
    for order in orders:
        name = order.get("customer", "anonymous")
        totals[name] = totals.get(name, 0) + order.get("cents", 0)
        counts[name] = counts.get(name, 0) + 1
    ranked = sorted(totals.items(), key=_by_amount, reverse=True)
    lines = []
    lines.append("%-4s %-24s %8s %12s %12s" % ("rank", "customer", "orders", "total", "per order"))
    for rank, (name, cents) in enumerate(ranked[:limit], start=1):
        per = cents / counts[name]
        lines.append("%-4d %-24s %8d %12d %12.1f" % (rank, name[:24], counts[name], cents, per))
    rest = ranked[limit:]
    if rest:
        rest_total = sum(cents for _, cents in rest)
        lines.append("%-4s %-24s %8d %12d" % ("", "(%d others)" % len(rest), sum(counts[n] for n, _ in rest), rest_total))
    grand = sum(totals.values())
    lines.append("%-4s %-24s %8d %12d" % ("", "all customers", sum(counts.values()), grand))
    if grand:
        share = 100.0 * sum(c for _, c in ranked[:limit]) / grand
        lines.append("top %d share: %.1f%%" % (limit, share))
    return "\n".join(lines)


def _by_amount(pair):
    return (pair[1], pair[0])


def churn_table(orders, window=3):
    last_seen = {}
    first_seen = {}
    for order in orders:
        name = order.get("customer", "anonymous")
        month = order.get("month", 1)
        last_seen[name] = max(last_seen.get(name, month), month)
        first_seen[name] = min(first_seen.get(name, month), month)
    latest = max(last_seen.values()) if last_seen else 0
    active, lapsing, lost = [], [], []
    for name in sorted(last_seen):
        gap = latest - last_seen[name]
        if gap < window:
            active.append(name)
        elif gap < 2 * window:
            lapsing.append(name)
        else:
            lost.append(name)
    out = []
    out.append("window %d months, latest month %d" % (window, latest))
    for label, group in (("active", active), ("lapsing", lapsing), ("lost", lost)):
        out.append("%-8s %3d  %s" % (label, len(group), ", ".join(group)))
    tenure = [last_seen[n] - first_seen[n] + 1 for n in last_seen]
    if tenure:
        out.append("mean tenure %.2f months" % (sum(tenure) / float(len(tenure))))
        out.append("longest tenure %d months" % max(tenure))
    return "\n".join(out)


def cohort_matrix(orders):
    cohorts = {}
    first = {}
    for order in sorted(orders, key=_by_month):
        name = order.get("customer", "anonymous")
        month = order.get("month", 1)
        first.setdefault(name, month)
        start = first[name]
        row = cohorts.setdefault(start, {})
        offset = month - start
        row.setdefault(offset, set()).add(name)
    lines = []
    header = "cohort " + " ".join("+%-3d" % k for k in range(12))
    lines.append(header)
    lines.append("-" * len(header))
    for start in sorted(cohorts):
        row = cohorts[start]
        size = len(row.get(0, ()))
        cells = []
        for k in range(12):
            members = row.get(k)
            if members is None:
                cells.append("  . ")
            elif size:
                cells.append("%3d%%" % round(100.0 * len(members) / size))
            else:
                cells.append("  ? ")
        lines.append("%-6s %s" % (MONTHS[start - 1], " ".join(cells)))
    lines.append("")
    lines.append("each row follows the customers whose first order fell in that month")
    lines.append("cells give the share of the cohort ordering again k months later")
    return "\n".join(lines)


def _by_month(order):
    return order.get("month", 1)
