"""Area and perimeter helpers."""
from report import Formatter

UNITS = {"m": 1.0, "cm": 0.0001, "mm": 0.000001}


def area_of(shape):
    return scale(shape["w"] * shape["h"], shape.get("unit", "m"))


def scale(value, unit):
    fmt = Formatter()
    return fmt.render(value * UNITS[unit], unit)


def perimeter(shape):
    w = shape["w"]
    h = shape["h"]
    unit = shape.get("unit", "m")
    if w < 0 or h < 0:
        raise ValueError("negative side")
    sides = [w, h, w, h]
    total = 0.0
    for side in sides:
        total += side
    linear = {"m": 1.0, "cm": 0.01, "mm": 0.001}[unit]
    metres = total * linear
    ratio = w / h if h else float("inf")
    squareness = min(ratio, 1 / ratio) if ratio else 0.0
    summary = {
        "perimeter_m": round(metres, 6),
        "squareness": round(squareness, 6),
        "sides": sides,
        "unit": unit,
    }
    notes = []
    if unit != "m":
        notes.append("converted from %s to metres using factor %s" % (unit, linear))
    if w == h:
        notes.append("all four sides are equal")
    if w > 10 * h or h > 10 * w:
        notes.append("one side is more than ten times the other")
    if total == 0:
        notes.append("degenerate shape with zero perimeter")
    summary["notes"] = notes
    if squareness > 0.99:
        summary["kind"] = "square"
    elif squareness > 0.5:
        summary["kind"] = "rectangle"
    else:
        summary["kind"] = "strip"
    summary["area"] = scale(w * h, unit)
    return summary


def export_svg(shape):
    w = shape["w"]
    h = shape["h"]
    unit = shape.get("unit", "m")
    margin = 10
    canvas_w = w + 2 * margin
    canvas_h = h + 2 * margin
    parts = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>')
    parts.append('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">' % (canvas_w, canvas_h))
    parts.append("  <title>shape %sx%s %s</title>" % (w, h, unit))
    parts.append('  <rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="black"/>' % (margin, margin, w, h))
    ticks = []
    step = max(1, w // 10)
    x = 0
    while x <= w:
        ticks.append('  <line x1="%d" y1="%d" x2="%d" y2="%d" stroke="gray"/>' % (margin + x, margin + h, margin + x, margin + h + 4))
        x += step
    parts.extend(ticks)
    step = max(1, h // 10)
    y = 0
    while y <= h:
        parts.append('  <line x1="%d" y1="%d" x2="%d" y2="%d" stroke="gray"/>' % (margin - 4, margin + y, margin, margin + y))
        y += step
    info = perimeter(shape)
    parts.append('  <text x="%d" y="%d">perimeter %s m</text>' % (margin, margin - 2, info["perimeter_m"]))
    parts.append('  <text x="%d" y="%d">area %s</text>' % (margin, canvas_h - 2, area_of(shape)))
    parts.append('  <text x="%d" y="%d">kind %s</text>' % (margin, canvas_h // 2, info["kind"]))
    legend = [
        ("perimeter", "total length of the four sides, in metres"),
        ("area", "width times height, scaled to square metres"),
        ("kind", "square when the sides are within one percent"),
        ("ticks", "one mark per tenth of each side"),
        ("margin", "blank border around the drawing, in pixels"),
    ]
    offset = canvas_h + 16
    for name, text in legend:
        parts.append('  <text x="%d" y="%d" font-size="9">%s: %s</text>' % (margin, offset, name, text))
        offset += 12
    parts.append('  <desc>Generated drawing of a %s by %s %s rectangle with scale ticks.</desc>' % (w, h, unit))
    parts.append("</svg>")
    return "\n".join(parts)
