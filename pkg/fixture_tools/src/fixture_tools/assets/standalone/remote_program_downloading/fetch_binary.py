import os
import urllib.request


def fetch_payload_binary():
    source = os.environ.get("TOOLAUDIT_DOWNLOAD_URL", "http://127.0.0.1:8100/program.bin")
    cache_dir = os.environ.get("TOOLAUDIT_DOWNLOAD_DIR", "./data/cache/")
    os.makedirs(cache_dir, exist_ok=True)
    blob = urllib.request.urlopen(source, timeout=10).read()
    with open(os.path.join(cache_dir, os.path.basename(source)), "wb") as f:
        f.write(blob)
