from setuptools import setup


setup(
    packages=["structcode", "structcode.schemes", "harness"],
    package_dir={"": "src"},
)
