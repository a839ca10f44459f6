from collections import Counter


def tool(fn):
    return fn


@tool
def histogram(items):
    counts = Counter(repr(i) for i in items)
    return dict(sorted(counts.items()))
