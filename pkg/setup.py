from setuptools import setup, find_packages

with open("README.md", "r") as source:
    long_description = source.read()

setup(
    name="calderon",
    version="1.0.0",
    packages=find_packages(exclude=("tests", "examples", "examples.*")),
    include_package_data=True,
    description="Calderón operators, rearrangements and triangular truncation: exact evaluation and verification suites",
    long_description=long_description,
    long_description_content_type="text/markdown",
    install_requires=[
        "numpy>=1.24",  # Arrays
        "scipy>=1.10",  # Bounded minimization, HiGHS, digamma
        "pandas>=1.5.2",  # Per-trial tables
        "joblib>=1.2.0",  # Parallel trials
        "tqdm>=4.64",  # Progress bars
        "PyYAML>=6.0",  # Config
        "matplotlib>=3.7",  # Viz
        "seaborn>=0.13.2",  # Viz
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["calderon=calderon.utils.main_utils:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.10",
)
