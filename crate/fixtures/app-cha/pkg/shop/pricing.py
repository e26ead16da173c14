"""Pricing strategies, selected by name."""
from shop.models import Money

REGISTRY = {}


def register(name):
    def deco(cls):
        REGISTRY[name] = cls
        return cls

    return deco


class Strategy:
    label = "base"

    def apply(self, subtotal, count):
        return subtotal


@register("flat")
class FlatOff(Strategy):
    label = "flat"

    def apply(self, subtotal, count):
        return subtotal + Money(-100 if subtotal.cents >= 1000 else 0, subtotal.currency)


@register("bulk")
class BulkRate(Strategy):
    label = "bulk"

    def apply(self, subtotal, count):
        rate = 0.9 if count >= 3 else 1.0
        return subtotal * rate


@register("none")
class NoDiscount(Strategy):
    pass


def lookup(name):
    return REGISTRY[name]()


def describe_all(rates):
    out = []
    names = sorted(REGISTRY)
    out.append("%d pricing strategies registered" % len(names))
    sample = Money(rates.get("sample", 5000), rates.get("currency", "EUR"))
    for name in names:
        strategy = REGISTRY[name]()
        for count in (1, 3, 10):
            result = strategy.apply(sample, count)
            saved = sample.cents - result.cents
            pct = 100.0 * saved / sample.cents if sample.cents else 0.0
            out.append("%-6s count=%-3d %8d -> %8d (%.1f%% off)" % (name, count, sample.cents, result.cents, pct))
    out.append("")
    out.append("strategies are applied to the cart subtotal after line discounts")
    out.append("bulk applies from three items, flat from ten currency units")
    ranking = []
    for name in names:
        result = REGISTRY[name]().apply(sample, 10)
        ranking.append((result.cents, name))
    ranking.sort()
    out.append("cheapest for ten items: %s" % ranking[0][1])
    out.append("dearest for ten items: %s" % ranking[-1][1])
    return "\n".join(out)
