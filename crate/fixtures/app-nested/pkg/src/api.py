import asyncio

import src.core.pipeline as pl
from .core import text as T
from .core.registry import *
from vendorlib import tokenize_words as tok

CONFIG = load_defaults()


def ingest(event, context):
    words = tok(event["text"])
    cleaned = pl.run(words, lower=event.get("lower", True))
    counts = asyncio.run(pl.count_async(cleaned))
    return {"counts": counts, "top": T.top(counts, n=CONFIG["top_n"])}


def query(event, context):
    windows = list(pl.window(event["items"], size=event.get("size", 2)))
    style = getattr(T, event.get("style", "plain"))
    return {"windows": windows, "joined": style(T.join(event["items"], sep=event.get("sep", "-")))}
