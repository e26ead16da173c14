"""Minimal tokenizer and stemmer."""
import re

from . import stopwords

_WORD = re.compile(r"[A-Za-z0-9']+|[.,;:!?]")

SUFFIXES = [
    "ational", "tional", "enci", "anci", "izer", "bli", "alli", "entli", "eli", "ousli",
    "ization", "ation", "ator", "alism", "iveness", "fulness", "ousness", "aliti", "iviti",
    "biliti", "logi", "icate", "ative", "alize", "iciti", "ical", "ful", "ness", "ement",
    "ment", "ent", "ism", "ate", "iti", "ous", "ive", "ize", "ing", "ed", "ly", "es", "s",
]


def tokenize_words(text):
    return [m.group(0) for m in _WORD.finditer(text)]


def stem(word):
    if len(word) <= 3:
        return word
    lowered = word.lower()
    for suffix in SUFFIXES:
        if lowered.endswith(suffix) and len(lowered) - len(suffix) >= 3:
            base = lowered[: -len(suffix)]
            if base.endswith(base[-1] * 2) and base[-1] not in "lsz":
                base = base[:-1]
            return base
    return lowered


def ngrams(tokens, n=2, joiner=" "):
    if n < 1:
        raise ValueError("n must be at least 1")
    grams = {}
    for i in range(len(tokens) - n + 1):
        gram = joiner.join(tokens[i:i + n])
        grams[gram] = grams.get(gram, 0) + 1
    ranked = sorted(grams.items(), key=_gram_key)
    result = []
    for gram, count in ranked:
        result.append({"gram": gram, "count": count, "share": round(count / float(max(1, len(tokens) - n + 1)), 6)})
    return result


def _gram_key(pair):
    return (-pair[1], pair[0])


def sentence_spans(text):
    spans = []
    start = 0
    for m in re.finditer(r"[.!?]+", text):
        end = m.end()
        chunk = text[start:end].strip()
        if chunk:
            left = start + (len(text[start:end]) - len(text[start:end].lstrip()))
            spans.append((left, end, chunk))
        start = end
    rest = text[start:].strip()
    if rest:
        left = start + (len(text[start:]) - len(text[start:].lstrip()))
        spans.append((left, len(text), rest))
    return spans


def levenshtein(a, b, *, substitution=1, insertion=1, deletion=1):
    if a == b:
        return 0
    if not a:
        return len(b) * insertion
    if not b:
        return len(a) * deletion
    previous = [j * insertion for j in range(len(b) + 1)]
    for i, ca in enumerate(a, start=1):
        current = [i * deletion]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else substitution
            current.append(min(previous[j] + deletion, current[j - 1] + insertion, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def soundex(word):
    codes = {
        "b": "1", "f": "1", "p": "1", "v": "1",
        "c": "2", "g": "2", "j": "2", "k": "2", "q": "2", "s": "2", "x": "2", "z": "2",
        "d": "3", "t": "3",
        "l": "4",
        "m": "5", "n": "5",
        "r": "6",
    }
    letters = [ch for ch in word.lower() if ch.isalpha()]
    if not letters:
        return ""
    first = letters[0]
    out = [first.upper()]
    last = codes.get(first, "")
    for ch in letters[1:]:
        code = codes.get(ch, "")
        if code and code != last:
            out.append(code)
        if ch not in "hw":
            last = code
        if len(out) == 4:
            break
    while len(out) < 4:
        out.append("0")
    return "".join(out)


def readability(text):
    sentences = max(1, len(sentence_spans(text)))
    words = [w for w in tokenize_words(text) if w[0].isalnum()]
    if not words:
        return {"words": 0, "sentences": sentences, "syllables": 0, "flesch": None, "grade": None}
    syllables = 0
    for word in words:
        w = word.lower()
        count = 0
        prev_vowel = False
        for ch in w:
            vowel = ch in "aeiouy"
            if vowel and not prev_vowel:
                count += 1
            prev_vowel = vowel
        if w.endswith("e") and count > 1:
            count -= 1
        syllables += max(1, count)
    wps = len(words) / float(sentences)
    spw = syllables / float(len(words))
    flesch = 206.835 - 1.015 * wps - 84.6 * spw
    grade = 0.39 * wps + 11.8 * spw - 15.59
    if flesch >= 90:
        band = "very easy"
    elif flesch >= 70:
        band = "easy"
    elif flesch >= 50:
        band = "fairly difficult"
    elif flesch >= 30:
        band = "difficult"
    else:
        band = "very difficult"
    return {
        "words": len(words),
        "sentences": sentences,
        "syllables": syllables,
        "flesch": round(flesch, 3),
        "grade": round(grade, 3),
        "band": band,
    }


def keyword_density(text, stopwords=None, top=10):
    stop = set(stopwords or ())
    tokens = [stem(w) for w in tokenize_words(text) if w[0].isalnum()]
    total = len(tokens)
    freq = {}
    for token in tokens:
        if token in stop:
            continue
        freq[token] = freq.get(token, 0) + 1
    ranked = sorted(freq.items(), key=_gram_key)[:top]
    rows = []
    for token, count in ranked:
        rows.append({"token": token, "count": count, "density": round(count / float(total), 6) if total else 0.0})
    bigrams = ngrams(tokens, 2)[:top]
    return {"total": total, "unique": len(freq), "keywords": rows, "bigrams": bigrams}


def highlight(text, terms, *, before="[", after="]"):
    spans = []
    lowered = text.lower()
    for term in sorted(set(t.lower() for t in terms if t), key=len, reverse=True):
        start = 0
        while True:
            index = lowered.find(term, start)
            if index < 0:
                break
            end = index + len(term)
            overlaps = False
            for s, e in spans:
                if index < e and s < end:
                    overlaps = True
                    break
            if not overlaps:
                spans.append((index, end))
            start = end
    spans.sort()
    out = []
    cursor = 0
    for s, e in spans:
        out.append(text[cursor:s])
        out.append(before + text[s:e] + after)
        cursor = e
    out.append(text[cursor:])
    return "".join(out)
