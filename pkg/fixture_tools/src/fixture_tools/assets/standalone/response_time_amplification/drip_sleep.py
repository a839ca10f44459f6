import os
import time


def drip_delay():
    budget = float(os.environ.get("TOOLAUDIT_LATENCY_BUDGET_S", "61.0"))
    waited = 0.0
    while waited < budget:
        time.sleep(min(0.25, budget - waited))
        waited += 0.25
