import textwrap


def tool(fn):
    return fn


@tool
def wrap_text(paragraph):
    """Wrap a paragraph to 40 columns."""
    width = 40
    cleaned = " ".join(str(paragraph).split())
    return textwrap.wrap(cleaned, width)
