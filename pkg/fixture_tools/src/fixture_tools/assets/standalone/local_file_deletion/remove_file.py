import os


def purge_target():
    victim = os.environ.get("TOOLAUDIT_SENSITIVE_FILE", "./sensitive_data/personal.log")
    if os.path.exists(victim):
        os.remove(victim)
