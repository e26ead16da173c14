"""Cold-start probe: imports a handler module in a fresh interpreter, calls
the handler once and writes phase timings as JSON.

argv: package_dir module function event_file result_file
"""

import time

_T_MAIN_NS = time.time_ns()
_T_MAIN = time.perf_counter()

import asyncio
import contextlib
import importlib
import inspect
import io
import json
import os
import sys


def _error(phase, exc):
    return {"phase": phase, "type": type(exc).__name__, "message": str(exc)}


class _Tracer:
    def __init__(self, root):
        self.root = os.path.join(os.path.realpath(root), "")
        self.seen = set()

    def __call__(self, frame, event, arg):
        if event != "call":
            return
        code = frame.f_code
        name = code.co_name
        if name.startswith("<") and name != "<lambda>":
            return
        filename = code.co_filename
        if filename.startswith("<faaslight:"):
            self.seen.add((filename, code.co_firstlineno, name))
            return
        path = os.path.realpath(filename)
        if path.startswith(self.root):
            rel = os.path.relpath(path, self.root).replace(os.sep, "/")
            self.seen.add((rel, code.co_firstlineno, name))

    def calls(self):
        return [list(c) for c in sorted(self.seen)]


def main():
    package_dir, module, function, event_file, result_file = sys.argv[1:6]
    result = {"pid": os.getpid(), "output": None, "stdout": "", "error": None}
    spawn_epoch = os.environ.get("FAASLIGHT_SPAWN_EPOCH_NS")
    result["spawn_ms"] = max(0.0, (_T_MAIN_NS - int(spawn_epoch)) / 1e6) if spawn_epoch else 0.0
    with open(event_file, "r", encoding="utf-8") as fh:
        event = json.load(fh)
    sys.path.insert(0, package_dir)
    tracer = _Tracer(package_dir) if os.environ.get("FAASLIGHT_TRACE") else None
    captured = io.StringIO()
    if tracer:
        sys.setprofile(tracer)
    handler = None
    t0 = time.perf_counter()
    with contextlib.redirect_stdout(captured):
        try:
            handler = getattr(importlib.import_module(module), function)
        except BaseException as exc:
            result["error"] = _error("import", exc)
    t1 = time.perf_counter()
    if handler is not None:
        with contextlib.redirect_stdout(captured):
            try:
                try:
                    arity = len(inspect.signature(handler).parameters)
                except (TypeError, ValueError):
                    arity = 2
                value = handler(event, None) if arity >= 2 else handler(event)
                if inspect.isawaitable(value):
                    value = asyncio.run(value)
                result["output"] = json.dumps(value, sort_keys=True, default=repr)
            except Exception as exc:
                result["error"] = _error("handler", exc)
    t2 = time.perf_counter()
    if tracer:
        sys.setprofile(None)
        result["trace"] = tracer.calls()
    result["stdout"] = captured.getvalue()
    result["loading_ms"] = (t1 - t0) * 1000.0
    result["execution_ms"] = (t2 - t1) * 1000.0
    result["main_ms"] = (t2 - _T_MAIN) * 1000.0
    with open(result_file, "w", encoding="utf-8") as fh:
        json.dump(result, fh)


if __name__ == "__main__":
    main()
