"""Rendering helpers bundled with the library; unused by the app."""
import json


def render_table(rows, headers=None, pad=1):
    """Render rows as a boxed plain-text table.

    Parameters
    ----------
    rows : list of dict
        Records to render; missing keys render as empty cells.
    headers : list of str, optional
        Column order. Defaults to the keys of the first row.
    pad : int
        Spaces on each side of a cell.

    Returns
    -------
    str
        The table, or an empty string when ``rows`` is empty. Numbers are
        right-aligned and everything else is left-aligned.
    """
    if not rows:
        return ""
    headers = list(headers or rows[0].keys())
    widths = {h: len(str(h)) for h in headers}
    for row in rows:
        for h in headers:
            widths[h] = max(widths[h], len(str(row.get(h, ""))))
    space = " " * pad
    sep = "+" + "+".join("-" * (widths[h] + 2 * pad) for h in headers) + "+"
    out = [sep]
    out.append("|" + "|".join(space + str(h).ljust(widths[h]) + space for h in headers) + "|")
    out.append(sep)
    for row in rows:
        cells = []
        for h in headers:
            value = row.get(h, "")
            text = str(value)
            if isinstance(value, (int, float)):
                cells.append(space + text.rjust(widths[h]) + space)
            else:
                cells.append(space + text.ljust(widths[h]) + space)
        out.append("|" + "|".join(cells) + "|")
    out.append(sep)
    return "\n".join(out)


def render_csv(rows, headers=None, delimiter=","):
    """Serialize rows as CSV text with CRLF line endings.

    Fields containing the delimiter, a quote or a newline are quoted and
    inner quotes doubled, following RFC 4180.

    Parameters
    ----------
    rows : list of dict
    headers : list of str, optional
        Column order. Defaults to the keys of the first row.
    delimiter : str
        Single-character field separator.
    """
    if not rows:
        return ""
    headers = list(headers or rows[0].keys())
    lines = [delimiter.join(headers)]
    for row in rows:
        cells = []
        for h in headers:
            text = str(row.get(h, ""))
            if delimiter in text or '"' in text or "\n" in text:
                text = '"' + text.replace('"', '""') + '"'
            cells.append(text)
        lines.append(delimiter.join(cells))
    return "\r\n".join(lines) + "\r\n"


def parse_csv(text, delimiter=","):
    """Parse CSV text produced by :func:`render_csv` back into dicts.

    The first record supplies the keys. Quoted fields may contain the
    delimiter, doubled quotes and newlines. Trailing carriage returns are
    stripped from unquoted final fields.

    Returns
    -------
    list of dict
        One dict per data record, values left as strings.
    """
    rows = []
    field = []
    record = []
    quoted = False
    i = 0
    while i < len(text):
        ch = text[i]
        if quoted:
            if ch == '"':
                if i + 1 < len(text) and text[i + 1] == '"':
                    field.append('"')
                    i += 1
                else:
                    quoted = False
            else:
                field.append(ch)
        elif ch == '"':
            quoted = True
        elif ch == delimiter:
            record.append("".join(field))
            field = []
        elif ch == "\n":
            record.append("".join(field).rstrip("\r"))
            rows.append(record)
            field = []
            record = []
        else:
            field.append(ch)
        i += 1
    if field or record:
        record.append("".join(field))
        rows.append(record)
    if not rows:
        return []
    headers = rows[0]
    return [dict(zip(headers, r)) for r in rows[1:]]


def render_markdown(rows, headers=None):
    """Render rows as a GitHub-flavoured Markdown table.

    Columns whose values are all numeric are right-aligned. Pipe characters
    inside cells are escaped so the table structure survives.

    Parameters
    ----------
    rows : list of dict
    headers : list of str, optional
    """
    if not rows:
        return ""
    headers = list(headers or rows[0].keys())
    out = ["| " + " | ".join(headers) + " |"]
    aligns = []
    for h in headers:
        numeric = all(isinstance(r.get(h), (int, float)) for r in rows)
        aligns.append("---:" if numeric else ":---")
    out.append("| " + " | ".join(aligns) + " |")
    for row in rows:
        cells = [str(row.get(h, "")).replace("|", "\\|") for h in headers]
        out.append("| " + " | ".join(cells) + " |")
    return "\n".join(out) + "\n"


def render_json(rows, indent=2, sort_keys=True):
    """Serialize rows as a JSON array with predictable output.

    NaN becomes null, sets become sorted lists and bytes are decoded as
    Latin-1 so that any row can be serialized without raising.

    Parameters
    ----------
    rows : iterable of dict
    indent : int
    sort_keys : bool
    """
    cleaned = []
    for row in rows:
        item = {}
        for key, value in row.items():
            if isinstance(value, float) and value != value:
                value = None
            elif isinstance(value, (set, frozenset)):
                value = sorted(value)
            elif isinstance(value, bytes):
                value = value.decode("latin-1")
            item[str(key)] = value
        cleaned.append(item)
    return json.dumps(cleaned, indent=indent, sort_keys=sort_keys)


def wrap_text(text, width=72, indent=""):
    """Greedy word wrap.

    Parameters
    ----------
    text : str
        Input; runs of whitespace collapse to single spaces.
    width : int
        Maximum line length including the indent.
    indent : str
        Prefix for every output line.

    Returns
    -------
    str
        Wrapped lines joined by newlines. Words longer than ``width`` are
        kept whole on their own line.
    """
    words = text.split()
    lines = []
    current = indent
    for word in words:
        if len(current) + len(word) + 1 > width and current.strip():
            lines.append(current.rstrip())
            current = indent
        if current.strip():
            current += " "
        current += word
    if current.strip():
        lines.append(current.rstrip())
    return "\n".join(lines)


def humanize_bytes(count, binary=True):
    """Format a byte count for people.

    Parameters
    ----------
    count : int
    binary : bool
        Use powers of 1024 and IEC units when true, powers of 1000 and SI
        units otherwise.

    Examples
    --------
    >>> humanize_bytes(1536)
    '1.5 KiB'
    >>> humanize_bytes(1500, binary=False)
    '1.5 kB'
    """
    base = 1024.0 if binary else 1000.0
    units = ["KiB", "MiB", "GiB", "TiB"] if binary else ["kB", "MB", "GB", "TB"]
    if count < base:
        return "%d B" % count
    value = float(count)
    for unit in units:
        value /= base
        if value < base:
            return "%.1f %s" % (value, unit)
    return "%.1f %s" % (value, units[-1])


def humanize_duration(seconds):
    """Format a duration in seconds as days, hours, minutes and seconds.

    Sub-second durations are shown in milliseconds. Zero components are
    omitted, so 3660 seconds renders as ``1h 1m``.

    Examples
    --------
    >>> humanize_duration(0.25)
    '250 ms'
    >>> humanize_duration(90061)
    '1d 1h 1m 1s'
    """
    if seconds < 1:
        return "%d ms" % round(seconds * 1000)
    parts = []
    for label, size in (("d", 86400), ("h", 3600), ("m", 60)):
        if seconds >= size:
            whole = int(seconds // size)
            parts.append("%d%s" % (whole, label))
            seconds -= whole * size
    if seconds or not parts:
        parts.append("%ds" % int(seconds))
    return " ".join(parts)


def histogram(values, buckets=10, width=40):
    """Draw a horizontal text histogram.

    Parameters
    ----------
    values : sequence of float
    buckets : int
        Number of equal-width bins between the minimum and maximum.
    width : int
        Length of the longest bar.

    Returns
    -------
    str
        One line per bucket with its lower bound, bar and count.
    """
    if not values:
        return ""
    low = min(values)
    high = max(values)
    span = (high - low) or 1
    counts = [0] * buckets
    for v in values:
        slot = min(buckets - 1, int((v - low) / span * buckets))
        counts[slot] += 1
    peak = max(counts)
    lines = []
    for i, c in enumerate(counts):
        start = low + span * i / buckets
        bar = "#" * (c * width // peak if peak else 0)
        lines.append("%10.2f | %-*s %d" % (start, width, bar, c))
    return "\n".join(lines)


def diff_rows(old, new, key):
    """Compare two row sets keyed by ``key``.

    Parameters
    ----------
    old, new : list of dict
    key : str
        Field that identifies a row in both sets.

    Returns
    -------
    dict
        ``added`` and ``removed`` key lists, and ``changed`` as a list of
        ``(key, fields)`` pairs naming the fields whose values differ.
    """
    before = {r[key]: r for r in old}
    after = {r[key]: r for r in new}
    added = sorted(k for k in after if k not in before)
    removed = sorted(k for k in before if k not in after)
    changed = []
    for k in sorted(k for k in after if k in before):
        fields = sorted(f for f in set(before[k]) | set(after[k]) if before[k].get(f) != after[k].get(f))
        if fields:
            changed.append((k, fields))
    return {"added": added, "removed": removed, "changed": changed}
