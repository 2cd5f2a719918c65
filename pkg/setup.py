"""Setup script for the QMS Sampling Engine."""
from setuptools import setup, find_packages

setup(
    name="qms-sampling-engine",
    version="1.0.0",
    description="Quantum measurement as statistical sampling: recorded fields, parameters and error indicators",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "pandas>=2.0.0",
        "numpy>=1.24.0",
        "pyyaml>=6.0",
        "scipy>=1.12.0",
    ],
    entry_points={"console_scripts": ["qms=src.main:main"]},
    python_requires=">=3.9",
)
