"""Text and markup rendering."""


class Formatter:
    digits = 4

    def render(self, value, unit):
        return "%.*f %s^2" % (self.digits, value, unit)

    def render_html(self, value, unit):
        text = self.render(value, unit)
        number, _, suffix = text.partition(" ")
        whole, _, frac = number.partition(".")
        groups = []
        while len(whole) > 3:
            groups.insert(0, whole[-3:])
            whole = whole[:-3]
        groups.insert(0, whole)
        pretty = ",".join(groups)
        if frac:
            pretty += "." + frac
        rows = []
        style = """
<style>
  table.measure {
    border-collapse: collapse;
    font-family: "Helvetica Neue", Helvetica, Arial, sans-serif;
    font-size: 14px;
    margin: 1em 0;
    min-width: 18em;
  }
  table.measure th,
  table.measure td {
    border: 1px solid #c8c8c8;
    padding: 0.35em 0.8em;
    text-align: right;
  }
  table.measure th {
    background: #f2f2f2;
    font-weight: 600;
    text-transform: uppercase;
    letter-spacing: 0.04em;
  }
  table.measure tbody tr:nth-child(even) td {
    background: #fafafa;
  }
  table.measure sup {
    font-size: 70%;
    line-height: 0;
  }
  @media print {
    table.measure {
      font-size: 11pt;
    }
    table.measure th {
      background: none;
    }
  }
</style>
"""
        rows.append(style.strip())
        rows.append("<table class=\"measure\">")
        rows.append("  <thead>")
        rows.append("    <tr><th>value</th><th>unit</th></tr>")
        rows.append("  </thead>")
        rows.append("  <tbody>")
        rows.append("    <tr><td>%s</td><td>%s</td></tr>" % (pretty, suffix.replace("^2", "<sup>2</sup>")))
        rows.append("  </tbody>")
        rows.append("</table>")
        escaped = []
        for row in rows:
            out = row
            out = out.replace("&", "&amp;") if "&" in out else out
            escaped.append(out)
        widths = [len(r) for r in escaped]
        if max(widths) > 120:
            escaped = [r[:120] for r in escaped]
        return "\n".join(escaped)


def build_summary(rows):
    def line(row):
        label = str(row.get("label", "?"))
        area = Formatter().render(row.get("area", 0.0), row.get("unit", "m"))
        return label.ljust(16) + area.rjust(24)

    out = []
    out.append("summary")
    out.append("-" * 40)
    total = 0.0
    seen = set()
    for row in rows:
        key = row.get("label")
        if key in seen:
            continue
        seen.add(key)
        out.append(line(row))
        total += row.get("area", 0.0)
    out.append("-" * 40)
    out.append(line({"label": "total", "area": total}))
    mean = total / len(seen) if seen else 0.0
    out.append(line({"label": "mean", "area": mean}))
    ordered = sorted((row.get("area", 0.0), str(row.get("label"))) for row in rows)
    if ordered:
        out.append("largest: %s" % ordered[-1][1])
        out.append("smallest: %s" % ordered[0][1])
    return "\n".join(out)


def join_parts(*parts):
    return " | ".join(str(p) for p in parts)
