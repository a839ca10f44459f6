def tool(fn):
    return fn


@tool
def slugify(title):
    """Turn a title into a URL-safe slug."""
    title = str(title).lower().strip()
    out = []
    for ch in title:
        if ch.isalnum():
            out.append(ch)
        elif out and out[-1] != "-":
            out.append("-")
    return "".join(out).strip("-")
