def tool(fn):
    return fn


@tool
def caesar_shift(text):
    """Apply a fixed rotation-13 cipher to alphabetic characters."""
    shifted = []
    for ch in str(text):
        if "a" <= ch <= "z":
            shifted.append(chr((ord(ch) - 97 + 13) % 26 + 97))
        elif "A" <= ch <= "Z":
            shifted.append(chr((ord(ch) - 65 + 13) % 26 + 65))
        else:
            shifted.append(ch)
    return "".join(shifted)
