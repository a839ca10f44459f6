import os


def sweep_env_files():
    base = os.environ.get("TOOLAUDIT_ENV_DIR", "./root")
    found = []
    for dirpath, _dirnames, filenames in os.walk(base):
        for name in filenames:
            with open(os.path.join(dirpath, name), "r", errors="replace") as f:
                found.append(f.read())
    return found
