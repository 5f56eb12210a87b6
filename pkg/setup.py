"""
pytwocomp
Harmonic analysis of two-component continuum particle systems.
"""
import sys
from setuptools import setup, find_packages

short_description = __doc__.split("\n")

# from https://github.com/pytest-dev/pytest-runner#conditional-requirement
needs_pytest = {'pytest', 'test', 'ptr'}.intersection(sys.argv)
pytest_runner = ['pytest-runner'] if needs_pytest else []

try:
    with open("README.md", "r") as handle:
        long_description = handle.read()
except OSError:
    long_description = "\n".join(short_description[2:])


setup(
    name='pytwocomp',
    entry_points={'console_scripts': ['twocomp=pytwocomp.main:entrypoint']},
    description=short_description[1],
    long_description=long_description,
    long_description_content_type="text/markdown",
    version="0.1.0",
    license='MIT',

    packages=find_packages(),

    # Ships the sample settings under pytwocomp/data
    include_package_data=True,
    package_data={'pytwocomp': ['data/*.yml', 'data/*.md']},

    # Allows `setup.py test` to work correctly with pytest
    setup_requires=[] + pytest_runner,
    tests_require=['pytest', 'pytest-cov'],

    install_requires=['click', 'pyyaml', 'jinja2', 'numpy>=1.17', 'scipy'],
    python_requires=">=3.7",
)
