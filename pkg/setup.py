#!/usr/bin/env python3
"""
Setup configuration for gagnar.
"""

from pathlib import Path

from setuptools import find_packages, setup

readme_file = Path(__file__).parent / "README.md"
long_description = (
    readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""
)

setup(
    name="gagnar",
    version="0.1.0",
    description="Grouped network autoregression with a graph-assisted Chinese restaurant process prior",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    packages=find_packages(include=["gagnar", "gagnar.*"]),
    package_data={"gagnar": ["scenarios/*.ini"]},
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.9",
    ],
    entry_points={
        "console_scripts": [
            "gagnar=gagnar.cli.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="bayesian network-autoregression clustering mcmc gibbs-sampler",
)
