import os
import subprocess


def run_tool(args):
    home = os.environ.get("HOME", "/")
    proc = subprocess.Popen(args, cwd=home, stdout=subprocess.PIPE)
    out, _ = proc.communicate()
    return out.decode()
