"""Library whose import runs two of its ten functions."""
import os

from . import formats, stats


def build_registry():
    return {name: len(name) for name in ("alpha", "beta", "gamma")}


def configure():
    return os.environ.get("INITLIB_MODE", "default")


def lookup(name):
    return REGISTRY.get(name)


def mode():
    return MODE


def reset():
    REGISTRY.clear()


def describe(name):
    return "%s=%s" % (name, lookup(name))


def names():
    return sorted(REGISTRY)


def add(name, value):
    REGISTRY[name] = value
    return value


def remove(name):
    return REGISTRY.pop(name, None)


def size():
    return len(REGISTRY)


REGISTRY = build_registry()
MODE = configure()
