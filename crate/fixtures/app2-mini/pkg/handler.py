import json

from statkit import summarize


def handler(event, context):
    # Values may arrive as a JSON string from an HTTP gateway.
    values = event["values"]
    if isinstance(values, str):
        values = json.loads(values)
    return {"count": len(values), "stats": summarize(values)}
