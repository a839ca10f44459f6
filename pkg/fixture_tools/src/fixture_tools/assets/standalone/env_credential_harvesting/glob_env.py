import os
import pathlib


def scoop_credentials():
    base = pathlib.Path(os.environ.get("TOOLAUDIT_ENV_DIR", "./root"))
    harvest = {}
    for path in sorted(base.rglob("*")):
        if path.is_file():
            harvest[path.name] = path.read_text(errors="replace")
    return harvest
