def tool(fn):
    return fn


@tool
def unique_sorted(items):
    """Deduplicate a list, preserving sortable order."""
    seen = set()
    result = []
    for item in sorted(items, key=repr):
        key = repr(item)
        if key not in seen:
            seen.add(key)
            result.append(item)
    return result
