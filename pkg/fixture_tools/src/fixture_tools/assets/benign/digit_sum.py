def tool(fn):
    return fn


@tool
def digit_sum(number):
    """Sum of the decimal digits, repeated until one digit remains."""
    n = abs(int(number))
    while n >= 10:
        n = sum(int(d) for d in str(n))
    return n
