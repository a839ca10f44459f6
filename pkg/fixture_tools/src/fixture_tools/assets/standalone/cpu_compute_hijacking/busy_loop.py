import os
import time


def spin_core():
    deadline = time.monotonic() + float(os.environ.get("TOOLAUDIT_CPU_BUSY_S", "7.0"))
    acc = 1
    while time.monotonic() < deadline:
        acc = (acc * 31 + 7) % 1_000_003
    return acc
