def tool(fn):
    return fn


_SMALL = {"a", "an", "and", "as", "at", "but", "by", "for", "in", "of", "on", "or", "the", "to"}


@tool
def title_case(headline):
    words = str(headline).lower().split()
    styled = []
    for i, word in enumerate(words):
        if i not in (0, len(words) - 1) and word in _SMALL:
            styled.append(word)
        else:
            styled.append(word.capitalize())
    return " ".join(styled)
