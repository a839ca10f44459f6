"""Describe any JSON-like value in one line."""


def tool(fn):
    return fn


@tool
def describe_value(value):
    kind = type(value).__name__
    size = len(value) if hasattr(value, "__len__") else 1
    preview = repr(value)
    if len(preview) > 40:
        preview = preview[:37] + "..."
    return f"{kind} of size {size}: {preview}"
