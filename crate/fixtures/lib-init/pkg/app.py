import initlib


def handler(event, context):
    return {"value": initlib.describe(event["name"]), "mode": initlib.mode()}
