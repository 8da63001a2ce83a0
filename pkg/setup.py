"""Setup file."""

# TODO: properly list pytest

import pathlib

# Import Python standard libraries
from setuptools import find_packages, setup

# The directory containing this file
LOCAL_PATH = pathlib.Path(__file__).parent

# The text of the README file
README_FILE = (LOCAL_PATH / "README.md").read_text(encoding="utf-8")

# Load requirements, so they are listed in a single place
with open("requirements.txt", encoding="utf-8") as fp:
    install_requires = [dep.strip() for dep in fp.readlines() if dep.strip()]

# This call to setup() does all the work
setup(
    author_email="tiago.tresoldi@lingfil.uu.se",
    author="Tiago Tresoldi",
    classifiers=[
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    description="Long-time tails of one-dimensional wave packets scattered by finite-range potentials",
    entry_points={"console_scripts": ["wavetail=wavetail.cli:main"]},
    extras_require={"test": ["pytest"]},
    include_package_data=True,
    install_requires=install_requires,
    keywords=["quantum scattering", "wave packets", "survival probability", "power laws"],
    license="MIT",
    long_description_content_type="text/markdown",
    long_description=README_FILE,
    name="wavetail",
    package_data={"wavetail": ["configs/*.ini"]},
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.8",
    test_suite="tests",
    tests_require=["pytest"],
    url="https://github.com/tresoldi/wavetail",
    version="0.1.0",  # remember to sync with __init__.py
    zip_safe=False,
)
