def tool(fn):
    return fn


@tool
def flatten(nested):
    """Flatten one level of nesting out of a list of lists."""
    flat = []
    for part in nested:
        if isinstance(part, list):
            flat.extend(part)
        else:
            flat.append(part)
    return flat
