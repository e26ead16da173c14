WIDTH = 40


def top(counts, n):
    ranked = sorted(counts.items(), key=_rank)
    return [word for word, _ in ranked[:n]]


def _rank(pair):
    return (-pair[1], pair[0])


def join(items, sep):
    return sep.join(str(i) for i in items)


def plain(text):
    return text


def shout(text):
    return text.upper() + "!"


def wrap(text, width=WIDTH):
    lines = []
    line = ""
    for word in text.split():
        if len(word) > width:
            if line:
                lines.append(line)
                line = ""
            while len(word) > width:
                lines.append(word[:width - 1] + "-")
                word = word[width - 1:]
        candidate = word if not line else line + " " + word
        if len(candidate) > width:
            lines.append(line)
            line = word
        else:
            line = candidate
    if line:
        lines.append(line)
    return "\n".join(lines)


def slugify(text, *, max_len=60, sep="-"):
    table = {
        "&": "and",
        "@": "at",
        "%": "percent",
        "+": "plus",
        "=": "equals",
        "#": "hash",
    }
    out = []
    for ch in text.lower():
        if ch.isalnum():
            out.append(ch)
        elif ch in table:
            out.append(sep + table[ch] + sep)
        else:
            out.append(sep)
    slug = "".join(out)
    while sep + sep in slug:
        slug = slug.replace(sep + sep, sep)
    slug = slug.strip(sep)
    if len(slug) > max_len:
        cut = slug.rfind(sep, 0, max_len)
        slug = slug[:cut if cut > 0 else max_len]
    return slug or "untitled"


def columns(rows, gap=2):
    if not rows:
        return ""
    widths = []
    for row in rows:
        for i, cell in enumerate(row):
            text = str(cell)
            if i >= len(widths):
                widths.append(len(text))
            elif len(text) > widths[i]:
                widths[i] = len(text)
    out = []
    for row in rows:
        cells = []
        for i, cell in enumerate(row):
            text = str(cell)
            if isinstance(cell, (int, float)):
                cells.append(text.rjust(widths[i]))
            else:
                cells.append(text.ljust(widths[i]))
        out.append((" " * gap).join(cells).rstrip())
    rule = (" " * gap).join("-" * w for w in widths)
    out.insert(1, rule)
    return "\n".join(out)
