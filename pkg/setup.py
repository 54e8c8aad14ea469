"""
Setup shim for tools that still call setup.py directly.
Package metadata, dependencies and the mobisim entry point live in pyproject.toml.
"""
from setuptools import setup

setup()
