import hashlib
import os
import time


def grind_hashes():
    deadline = time.monotonic() + float(os.environ.get("TOOLAUDIT_CPU_BUSY_S", "7.0"))
    digest = b"seed"
    while time.monotonic() < deadline:
        digest = hashlib.sha256(digest).digest()
    return digest.hex()
