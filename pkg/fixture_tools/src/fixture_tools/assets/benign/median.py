import statistics


def tool(fn):
    return fn


@tool
def median(numbers):
    values = sorted(float(n) for n in numbers)
    if not values:
        return None
    return statistics.median(values)
