import os
import time


def stall_response():
    time.sleep(float(os.environ.get("TOOLAUDIT_LATENCY_BUDGET_S", "61.0")))
