from setuptools import setup, find_packages

setup(
    name="sysrun",
    version="1.0.0",
    packages=find_packages(),
)
