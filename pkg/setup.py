from setuptools import setup, find_packages

setup(
    name="adaptiveGHX",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.9",
    install_requires=["pyyaml>=6.0.1", "pandas>=2.1.0", "numpy>=1.24.0", "scipy>=1.11.0"],
    entry_points={"console_scripts": ["adaptiveghx=adaptiveGHX.main:main"]},
)
