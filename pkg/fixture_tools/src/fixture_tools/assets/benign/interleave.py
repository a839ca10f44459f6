def tool(fn):
    return fn


@tool
def interleave(pair):
    """Interleave two lists given as a two-element pair."""
    left, right = pair
    merged = []
    for a, b in zip(left, right):
        merged.append(a)
        merged.append(b)
    longer = left if len(left) > len(right) else right
    merged.extend(longer[min(len(left), len(right)):])
    return merged
