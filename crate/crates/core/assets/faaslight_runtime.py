"""Loads functions that were moved into the package's function store.

Each stub calls ``rewrite_template(key, signature, env, 1)``. The first call
for a key reads the store (once per process), executes the stored source in
a private namespace and caches the resulting function.
"""

import __future__
import gzip
import json
import os
import sys
import threading
import types

STORE_NAME = "faaslight_store.json.gz"

_lock = threading.Lock()
_records = None
_cache = {}
store_reads = 0


class LoaderError(Exception):
    pass


class StoreMissing(LoaderError):
    pass


class KeyMissing(LoaderError):
    pass


class MaterializeError(LoaderError):
    pass


class UnsupportedMode(LoaderError):
    pass


def store_path():
    override = os.environ.get("FAASLIGHT_STORE")
    if override:
        return override
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), STORE_NAME)


def _load():
    global _records, store_reads
    if _records is None:
        with _lock:
            if _records is None:
                path = store_path()
                try:
                    with gzip.open(path, "rb") as fh:
                        doc = json.loads(fh.read().decode("utf-8"))
                except FileNotFoundError:
                    raise StoreMissing(path) from None
                store_reads += 1
                if doc.get("version") != 1:
                    raise LoaderError("unsupported store version %r" % (doc.get("version"),))
                _records = doc["functions"]
    return _records


def _parse_signature(signature):
    name, _, rest = signature.partition("(")
    positional, keyword = [], []
    target = positional
    for part in rest.rstrip(")").split(","):
        part = part.strip()
        if part == "*":
            target = keyword
        elif part and part != "/":
            target.append(part)
    return name.strip(), positional, keyword


def _materialize(key, name, module_globals, overlay):
    record = _load().get(key)
    if record is None:
        raise KeyMissing(key)
    namespace = dict(module_globals)
    namespace.update(overlay)
    try:
        # Annotations stay unevaluated: they may name class-level or
        # typing-only symbols that the private namespace lacks.
        code = compile(
            record["source"],
            "<faaslight:%s>" % key,
            "exec",
            flags=__future__.annotations.compiler_flag,
            dont_inherit=True,
        )
        exec(code, namespace)
        fn = namespace[name]
    except Exception as exc:
        raise MaterializeError("%s: %s" % (key, exc)) from exc
    # Rebind to the live module globals so later global updates stay visible.
    live = types.FunctionType(fn.__code__, module_globals, fn.__name__, fn.__defaults__, fn.__closure__)
    live.__kwdefaults__ = fn.__kwdefaults__
    live.__dict__.update(fn.__dict__)
    live.__module__ = record.get("defining_module", module_globals.get("__name__"))
    qualname = key[len(live.__module__) + 1:] if key.startswith(live.__module__ + ".") else fn.__qualname__
    live.__qualname__ = qualname.split("#")[0]
    sys.stderr.write("FAASLIGHT_ONDEMAND %s\n" % key)
    sys.stderr.flush()
    return live


def rewrite_template(key, signature, env, mode):
    if mode != 1:
        raise UnsupportedMode(mode)
    entry = _cache.get(key)
    if entry is None:
        name, positional, keyword = _parse_signature(signature)
        params = set(positional) | set(keyword)
        overlay = {k: v for k, v in env.items() if k not in params}
        fn = _materialize(key, name, sys._getframe(1).f_globals, overlay)
        entry = _cache[key] = (fn, positional, keyword)
    fn, positional, keyword = entry
    return fn(*[env[p] for p in positional], **{p: env[p] for p in keyword})
