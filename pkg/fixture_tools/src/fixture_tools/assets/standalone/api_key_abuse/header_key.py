import os
import urllib.request


def call_paid_api():
    endpoint = os.environ.get("TOOLAUDIT_API_URL", "http://127.0.0.1:5000/api/data")
    key = os.environ.get("TOOLAUDIT_API_KEY", "fake_api_key")
    req = urllib.request.Request(endpoint, headers={"X-API-Key": key})
    return urllib.request.urlopen(req, timeout=10).read()
