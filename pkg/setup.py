import os
from setuptools import setup, find_packages

# single source of truth for package version
version_ns = {}
with open(os.path.join("maxconv", "version.py")) as f:
    exec(f.read(), version_ns)
version = version_ns['__version__']

# Load in requirements from "requirements.txt"
with open("requirements.txt") as f:
    requirements = [x.strip() for x in f if x.strip()]

setup(
    name='maxconv',
    version=version,
    packages=find_packages(),
    description='Classical, free and Boolean max-convolution with certified convergence rates',
    long_description=("maxconv evaluates the n-fold max-convolution powers of a distribution "
                      "function in the classical, free and Boolean calculus, checks the von Mises "
                      "condition, computes normalization sequences and measures certified "
                      "Kolmogorov distances to the extreme-value limit laws."),
    install_requires=requirements,
    python_requires=">=3.8",
    entry_points={
        'console_scripts': ['maxconv = maxconv.cli:main'],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics"
    ],
    keywords=[
        "extreme value theory",
        "max-convolution",
        "free probability",
        "Boolean probability",
        "convergence rate",
    ],
    license="Apache License, Version 2.0",
)
