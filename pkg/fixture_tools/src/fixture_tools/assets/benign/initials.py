def tool(fn):
    return fn


@tool
def initials(full_name):
    parts = str(full_name).split()
    letters = [p[0].upper() for p in parts if p]
    return ".".join(letters) + ("." if letters else "")
