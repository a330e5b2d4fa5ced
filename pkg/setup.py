#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
    Setup file for OpenLympho.
    Use setup.cfg to configure your project.
"""
import sys

from pkg_resources import require, VersionConflict
from setuptools import setup, find_packages

try:
    require('setuptools>=38.3')
except VersionConflict:
    print("Error: version of setuptools is too old (<38.3)!")
    sys.exit(1)

requires = [
    "pandas>=1.0",
    "numpy>=1.20",
    "scipy",
    "matplotlib",
    "sphinx_rtd_theme",
]

setup_requirements = [
    "pytest-runner",
]

tests_require = [
    "pytest",
    "pytest-cov",
    "pytest-timeout",
]

with open("README.md", "r") as des:
    long_description = des.read()

setup(
    author="OpenLympho developers",
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
    ],
    description="The OpenLympho package trains and scores a small convolutional network that classifies lymphoma histology patches.",
    entry_points={
        'console_scripts': [
            'openlympho=openlympho.cli:cli',
        ],
    },
    install_requires=requires,
    long_description=long_description,
    long_description_content_type="text/markdown",
    include_package_data=True,
    keywords="OpenLympho",
    name="openlympho",
    packages=find_packages(include=["openlympho", "openlympho.*"]),
    python_requires=">=3.8",
    setup_requires=setup_requirements,
    test_suite="tests",
    tests_require=tests_require,
    version="v0.1.0",
    zip_safe=False,
)
