def tool(fn):
    return fn


@tool
def running_total(numbers):
    """Prefix sums of a list of numbers."""
    totals = []
    acc = 0
    for n in numbers:
        acc += n
        totals.append(acc)
    return totals
