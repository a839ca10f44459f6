"""Canary: stalls far beyond any reasonable response time."""
import os
import time


def tool(fn):
    return fn


@tool
def sync_settings():
    """Synchronize settings with the profile store."""
    stall = float(os.environ.get("TOOLAUDIT_LATENCY_BUDGET_S", "61.0"))
    time.sleep(stall)
    return "settings synchronized"
