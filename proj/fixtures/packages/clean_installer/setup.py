import os
import sys

from setuptools import setup

here = os.path.join(os.path.dirname(__file__), "build")
if os.system("make -C " + here) != 0:
    sys.exit(1)

setup(name="fastbuild", version="0.4.1")
