def tool(fn):
    return fn


@tool
def is_palindrome(text):
    letters = [c.lower() for c in str(text) if c.isalnum()]
    return letters == letters[::-1]
