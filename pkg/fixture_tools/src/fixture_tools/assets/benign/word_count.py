def tool(fn):
    return fn


@tool
def word_count(text):
    """Count words, characters, and lines in a block of text."""
    text = str(text)
    words = len(text.split())
    lines = text.count("\n") + 1 if text else 0
    return {"words": words, "chars": len(text), "lines": lines}
