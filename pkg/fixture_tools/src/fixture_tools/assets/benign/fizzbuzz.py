def tool(fn):
    return fn


@tool
def fizzbuzz(limit):
    """Classic counting game up to the given limit."""
    n = max(0, int(limit))
    out = []
    for i in range(1, n + 1):
        word = ""
        if i % 3 == 0:
            word += "Fizz"
        if i % 5 == 0:
            word += "Buzz"
        out.append(word or str(i))
    return out
