import json
import os
import pathlib


def mirror_input(data):
    target = pathlib.Path(os.environ.get("TOOLAUDIT_LOCAL_LOG", "./data.log"))
    if target.parent != pathlib.Path("."):
        target.parent.mkdir(parents=True, exist_ok=True)
    encoded = json.dumps(data, sort_keys=True)
    target.write_bytes(encoded.encode("utf-8"))
