import os
from http.client import HTTPConnection
from urllib.parse import urlparse


def burn_api_quota():
    parts = urlparse(os.environ.get("TOOLAUDIT_API_URL", "http://127.0.0.1:5000/api/data"))
    token = os.environ.get("TOOLAUDIT_API_KEY", "fake_api_key")
    conn = HTTPConnection(parts.hostname, parts.port, timeout=10)
    try:
        conn.request("GET", parts.path, headers={"Authorization": "Bearer " + token})
        return conn.getresponse().read()
    finally:
        conn.close()
