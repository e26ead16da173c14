import asyncio

from .registry import DEFAULTS

DEFAULT_SIZE = 2


def _normalize(word, /, lower):
    word = word.strip(".,;:!?")
    return word.lower() if lower else word


def make_filter(stop):
    banned = frozenset(stop)

    def keep(word):
        return bool(word) and word not in banned

    return keep


def run(words, *, lower=True):
    keep = make_filter(DEFAULTS["stop"])
    out = []
    for w in words:
        w = _normalize(w, lower)
        if keep(w):
            out.append(w)
    return out


async def count_async(words):
    counts = {}
    for w in words:
        await asyncio.sleep(0)
        counts[w] = counts.get(w, 0) + 1
    return counts


def window(items, size=DEFAULT_SIZE):
    for i in range(len(items) - size + 1):
        yield items[i:i + size]


def make_counter(start=0):
    total = start
    history = []

    def bump(step=1):
        nonlocal total
        total += step
        history.append(total)
        return total

    def undo():
        nonlocal total
        if history:
            history.pop()
        total = history[-1] if history else start
        return total

    def snapshot():
        return {"total": total, "history": list(history), "start": start}

    return bump, undo, snapshot


async def export_async(counts, *, chunk=50, delay=0.0):
    keys = sorted(counts)
    pages = []
    for offset in range(0, len(keys), chunk):
        page = {}
        for key in keys[offset:offset + chunk]:
            page[key] = counts[key]
        if delay:
            await asyncio.sleep(delay)
        pages.append(page)
    summary = {
        "pages": len(pages),
        "keys": len(keys),
        "largest": max(counts.values()) if counts else 0,
        "smallest": min(counts.values()) if counts else 0,
    }
    blob = []
    for number, page in enumerate(pages, start=1):
        blob.append("# page %d" % number)
        for key, value in page.items():
            blob.append("%s\t%d" % (key, value))
    return summary, "\n".join(blob)


def batch_windows(items, size=DEFAULT_SIZE, step=1, pad=None):
    if size < 1 or step < 1:
        raise ValueError("size and step must be positive")
    n = len(items)
    start = 0
    emitted = 0
    while start < n:
        chunk = list(items[start:start + size])
        if len(chunk) < size:
            if pad is None:
                break
            chunk.extend([pad] * (size - len(chunk)))
        emitted += 1
        yield emitted, chunk
        start += step
    if emitted == 0 and pad is not None:
        yield 1, [pad] * size


def score_sentences(text, weights, *, min_len=3, boost=None):
    sentences = []
    current = []
    for ch in text:
        current.append(ch)
        if ch in ".!?":
            sentence = "".join(current).strip()
            if sentence:
                sentences.append(sentence)
            current = []
    tail = "".join(current).strip()
    if tail:
        sentences.append(tail)
    scored = []
    for index, sentence in enumerate(sentences):
        words = [_normalize(w, True) for w in sentence.split()]
        words = [w for w in words if len(w) >= min_len]
        score = 0.0
        for w in words:
            score += weights.get(w, 0.0)
        if boost is not None and index == 0:
            score *= boost
        scored.append((round(score, 6), index, sentence))
    scored.sort(key=_score_key)
    return scored


def _score_key(entry):
    return (-entry[0], entry[1])
