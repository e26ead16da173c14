"""Money, line items and carts."""

SYMBOLS = {"EUR": "EUR ", "USD": "$", "GBP": "GBP "}


class Money:
    def __init__(self, cents, currency):
        self.cents = int(cents)
        self.currency = currency

    def __add__(self, other):
        if other.currency != self.currency:
            raise ValueError("currency mismatch")
        return Money(self.cents + other.cents, self.currency)

    def __mul__(self, factor):
        return Money(round(self.cents * factor), self.currency)

    def __eq__(self, other):
        return isinstance(other, Money) and (self.cents, self.currency) == (other.cents, other.currency)

    def __lt__(self, other):
        return self.cents < other.cents

    def __repr__(self):
        return "Money(%d, %r)" % (self.cents, self.currency)

    def to_json(self):
        return {"cents": self.cents, "currency": self.currency}

    def format_locale(self, locale):
        whole, frac = divmod(abs(self.cents), 100)
        digits = str(whole)
        groups = []
        while len(digits) > 3:
            groups.insert(0, digits[-3:])
            digits = digits[:-3]
        groups.insert(0, digits)
        symbol = SYMBOLS.get(self.currency, self.currency + " ")
        sign = "-" if self.cents < 0 else ""
        if locale in ("de", "fr", "es", "it", "nl"):
            sep, dec = ".", ","
            if locale == "fr":
                sep = " "
            text = "%s%s%s%02d %s" % (sign, sep.join(groups), dec, frac, symbol)
        elif locale in ("en", "us", "gb"):
            text = "%s%s%s.%02d" % (sign, symbol, ",".join(groups), frac)
        elif locale == "ch":
            text = "%s%s %s.%02d" % (sign, self.currency, "'".join(groups), frac)
        elif locale == "in":
            head, tail = digits, ""
            rest = "".join(groups)
            if len(rest) > 3:
                tail = rest[-3:]
                head = rest[:-3]
                pairs = []
                while len(head) > 2:
                    pairs.insert(0, head[-2:])
                    head = head[:-2]
                if head:
                    pairs.insert(0, head)
                text = "%s%s%s,%s.%02d" % (sign, symbol, ",".join(pairs), tail, frac)
            else:
                text = "%s%s%s.%02d" % (sign, symbol, rest, frac)
        else:
            text = "%s%d.%02d %s" % (sign, whole, frac, self.currency)
        return text


class Item:
    kind = "item"

    def __init__(self, sku, unit, qty):
        self.sku = sku
        self.unit = unit
        self.qty = qty

    def price(self):
        return self.unit * self.qty

    def describe(self):
        return "%s x%d %s = %s" % (self.kind, self.qty, self.sku, self.price().cents)

    def __lt__(self, other):
        return (self.sku, self.qty) < (other.sku, other.qty)

    def weight_label(self, grams_per_unit):
        total = grams_per_unit * self.qty
        if total >= 1000000:
            value, unit = total / 1000000.0, "t"
        elif total >= 1000:
            value, unit = total / 1000.0, "kg"
        else:
            value, unit = float(total), "g"
        text = ("%.3f" % value).rstrip("0").rstrip(".")
        bands = [
            (250, "letter"),
            (2000, "small parcel"),
            (10000, "parcel"),
            (31500, "large parcel"),
            (1000000, "freight"),
        ]
        band = "pallet"
        for limit, name in bands:
            if total <= limit:
                band = name
                break
        return "%s %s (%s)" % (text, unit, band)


class DiscountItem(Item):
    kind = "discounted"

    def __init__(self, sku, unit, qty, discount):
        Item.__init__(self, sku, unit, qty)
        self.discount = discount

    def price(self):
        return Item.price(self) * (1 - self.discount)

    def explain(self):
        base = super().price()
        return "%s saves %d" % (self.sku, base.cents - self.price().cents)


class Cart:
    def __init__(self, currency):
        self.currency = currency
        self.items = []
        self.__history = []

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def add(self, item):
        self.items.append(item)

    def total(self):
        acc = Money(0, self.currency)
        for item in self.items:
            acc = acc + item.price()
        return acc

    def undo(self):
        self.__history.append(self.items.pop())

    def export_csv(self, delimiter=","):
        header = ["sku", "kind", "qty", "unit_cents", "line_cents", "currency"]
        rows = [delimiter.join(header)]
        for item in self.items:
            fields = [
                item.sku,
                item.kind,
                str(item.qty),
                str(item.unit.cents),
                str(item.price().cents),
                item.unit.currency,
            ]
            quoted = []
            for field in fields:
                if delimiter in field or '"' in field or "\n" in field:
                    field = '"' + field.replace('"', '""') + '"'
                quoted.append(field)
            rows.append(delimiter.join(quoted))
        total = self.total()
        rows.append(delimiter.join(["TOTAL", "", str(len(self.items)), "", str(total.cents), total.currency]))
        return "\r\n".join(rows) + "\r\n"

    def invoice_text(self, customer, number, locale="en"):
        width = 64
        out = []
        out.append("=" * width)
        out.append(("INVOICE %s" % number).center(width))
        out.append("=" * width)
        out.append("Customer: %s" % customer.get("name", "unknown"))
        address = customer.get("address", [])
        for line in address:
            out.append("          %s" % line)
        out.append("-" * width)
        out.append("%-20s %6s %16s %18s" % ("SKU", "QTY", "UNIT", "AMOUNT"))
        out.append("-" * width)
        for item in sorted(self.items):
            unit = item.unit.format_locale(locale)
            amount = item.price().format_locale(locale)
            out.append("%-20s %6d %16s %18s" % (item.sku[:20], item.qty, unit, amount))
        out.append("-" * width)
        total = self.total()
        out.append("%-44s %18s" % ("Total", total.format_locale(locale)))
        vat_rate = customer.get("vat", 0.2)
        vat = total * vat_rate
        out.append("%-44s %18s" % ("VAT %d%%" % round(vat_rate * 100), vat.format_locale(locale)))
        out.append("%-44s %18s" % ("Due", (total + vat).format_locale(locale)))
        out.append("=" * width)
        terms = customer.get("terms", 30)
        out.append("Payment due within %d days of the invoice date." % terms)
        out.append("Please quote invoice %s with your payment." % number)
        return "\n".join(out)
