"""Geometry service entry points."""
from shapes import area_of as compute_area
import report


def handle(event, context):
    return {"area": compute_area(event["shape"]), "tag": event.get("tag", "none")}


def admin(request):
    return {"ok": True, "area": compute_area(request)}


def debug_dump(event):
    lines = []
    lines.append("event dump")
    lines.append("==========")
    keys = sorted(event)
    for key in keys:
        value = event[key]
        if isinstance(value, dict):
            lines.append("%s:" % key)
            for sub in sorted(value):
                lines.append("  %s = %r" % (sub, value[sub]))
        elif isinstance(value, list):
            lines.append("%s: [%d items]" % (key, len(value)))
            for i, item in enumerate(value):
                lines.append("  - %d: %r" % (i, item))
        else:
            lines.append("%s = %r" % (key, value))
    shape = event.get("shape")
    if shape is not None:
        lines.append("computed area: %s" % compute_area(shape))
    else:
        lines.append("no shape present")
    width = max(len(line) for line in lines)
    border = "+" + "-" * (width + 2) + "+"
    boxed = [border]
    for line in lines:
        boxed.append("| " + line.ljust(width) + " |")
    boxed.append(border)
    totals = {"keys": len(keys), "width": width, "rows": len(lines)}
    footer = report.join_parts("keys=%d" % totals["keys"], "width=%d" % totals["width"], "rows=%d" % totals["rows"])
    boxed.append(footer)
    glossary = {
        "shape": "rectangle description with width w, height h and an optional unit",
        "w": "width of the rectangle measured in the given unit",
        "h": "height of the rectangle measured in the given unit",
        "unit": "one of m, cm or mm; metres are assumed when absent",
        "tag": "free-form label echoed back by the handler",
        "area": "width times height converted to square metres",
        "keys": "number of top-level fields present in the event",
        "width": "widest dumped line, used to size the surrounding box",
        "rows": "number of dumped lines before the box was drawn",
        "checksum": "rolling hash of the boxed output, for diffing dumps",
    }
    boxed.append("")
    boxed.append("field reference")
    boxed.append("---------------")
    for name in sorted(glossary):
        if name in event or name in totals or name in ("area", "checksum"):
            boxed.append("%-10s %s" % (name, glossary[name]))
    unknown = [key for key in keys if key not in glossary]
    if unknown:
        boxed.append("")
        boxed.append("unrecognized fields: %s" % ", ".join(unknown))
        boxed.append("these are ignored by handle() and admin() but kept in the dump")
    checksum = 0
    for line in boxed:
        for ch in line:
            checksum = (checksum * 31 + ord(ch)) % 1000003
    boxed.append("checksum %d" % checksum)
    return "\n".join(boxed)
