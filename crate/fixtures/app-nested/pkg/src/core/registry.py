DEFAULTS = {"top_n": 3, "stop": ["the", "a", "of"]}


def load_defaults():
    return dict(DEFAULTS)


def reset_defaults(values):
    global DEFAULTS
    previous = DEFAULTS
    DEFAULTS = dict(values)
    for key in ("top_n", "stop"):
        if key not in DEFAULTS:
            DEFAULTS[key] = previous[key]
    if not isinstance(DEFAULTS["top_n"], int) or DEFAULTS["top_n"] < 1:
        raise ValueError("top_n must be a positive integer")
    if not all(isinstance(word, str) for word in DEFAULTS["stop"]):
        raise ValueError("stop words must be strings")
    DEFAULTS["stop"] = sorted(set(DEFAULTS["stop"]))
    return previous
