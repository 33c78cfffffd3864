import http.client
from pathlib import Path

import requests


def fetch(host, path, out):
    conn = http.client.HTTPConnection(host)
    resp = requests.get("https://" + host + path, timeout=10)
    target = Path(out)
    target.write_text(resp.text)
    return conn
