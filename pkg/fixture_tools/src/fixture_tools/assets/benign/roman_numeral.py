def tool(fn):
    return fn


_VALUES = [
    (1000, "M"), (900, "CM"), (500, "D"), (400, "CD"),
    (100, "C"), (90, "XC"), (50, "L"), (40, "XL"),
    (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I"),
]


@tool
def roman_numeral(number):
    n = int(number)
    if not 0 < n < 4000:
        return None
    out = []
    for value, glyph in _VALUES:
        while n >= value:
            out.append(glyph)
            n -= value
    return "".join(out)
