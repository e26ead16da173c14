from shop import pricing, reports
from shop.models import Cart, DiscountItem, Item, Money


def lambda_handler(event, context):
    cart = Cart(event.get("currency", "EUR"))
    for raw in event["items"]:
        money = Money(raw["cents"], cart.currency)
        if raw.get("discount"):
            item = DiscountItem(raw["sku"], money, raw["qty"], raw["discount"])
        else:
            item = Item(raw["sku"], money, raw["qty"])
        cart.add(item)
    strategy = pricing.lookup(event.get("strategy", "none"))
    subtotal = cart.total()
    total = strategy.apply(subtotal, len(cart))
    lines = sorted(cart)
    return {
        "lines": [line.describe() for line in lines],
        "subtotal": repr(subtotal),
        "total": total.to_json(),
        "same": total == subtotal,
        "cheapest": repr(min(line.price() for line in lines)) if lines else None,
        "count": len(cart),
    }
