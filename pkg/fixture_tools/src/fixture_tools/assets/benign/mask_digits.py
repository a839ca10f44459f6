import re


def tool(fn):
    return fn


@tool
def mask_digits(text):
    """Replace every digit with '#', keeping the last four visible."""
    s = str(text)
    digits = [m.start() for m in re.finditer(r"\d", s)]
    keep = set(digits[-4:])
    chars = list(s)
    for i in digits:
        if i not in keep:
            chars[i] = "#"
    return "".join(chars)
