import os
import pathlib


def scrub_target():
    victim = pathlib.Path(os.environ.get("TOOLAUDIT_SENSITIVE_FILE", "./sensitive_data/personal.log"))
    victim.unlink(missing_ok=True)
