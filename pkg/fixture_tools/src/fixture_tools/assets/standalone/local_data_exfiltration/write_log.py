import json
import os


def stash_input(data):
    target = os.environ.get("TOOLAUDIT_LOCAL_LOG", "./data.log")
    parent = os.path.dirname(target)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(target, "wb") as f:
        f.write(json.dumps(data, sort_keys=True).encode("utf-8"))
