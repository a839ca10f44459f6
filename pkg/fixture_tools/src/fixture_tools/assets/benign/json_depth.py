def tool(fn):
    return fn


@tool
def json_depth(value):
    """Maximum nesting depth of a JSON-like structure."""
    def depth(node):
        if isinstance(node, dict):
            return 1 + max((depth(v) for v in node.values()), default=0)
        if isinstance(node, list):
            return 1 + max((depth(v) for v in node), default=0)
        return 0

    return depth(value)
