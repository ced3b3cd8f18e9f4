import pathlib

from pkg_resources import parse_requirements
from setuptools import find_packages, setup

# List of requirements
with pathlib.Path('requirements.txt').open() as requirements_txt:
    install_requires = [
        str(requirement) for requirement in parse_requirements(requirements_txt)
    ]

setup(
    name="christoffel_minkowski_pde",
    packages=find_packages(exclude=("tests", "tests.*", "examples", "examples.*")),
    package_data={"christoffel_minkowski_pde.io": ["monitors_schema.json"]},
    version="0.1.0",
    description="Library to solve rotationally symmetric expanding curvature flows and "
                "L_p-Christoffel-Minkowski solitons",
    license="MIT",
    python_requires=">=3.8",
    install_requires=install_requires,
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["cm-flow=christoffel_minkowski_pde.io.cli:main"]},
)
