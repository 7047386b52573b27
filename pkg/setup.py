#!/usr/bin/env python3
"""
Setup script for the PeriodicBVP solver
"""

from setuptools import setup, find_packages

APP_NAME = "periodic-bvp"

setup(
    name=APP_NAME,
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["periodic_bvp_cli"],
    install_requires=[
        'numpy>=1.24',
        'scipy>=1.9',
        'psutil>=5.9.0',
    ],
    entry_points={
        'console_scripts': [
            'periodic-bvp = src.ui.cli_app:main',
        ],
    },
    python_requires='>=3.11',
    description='Periodic and two-point boundary value problems for nonlinear control systems',
    long_description='Fixed-point and Newton solvers for x\' = Ax + g(x) + u(t) with '
                     'piecewise-constant inputs, convergence certificates and a reactor benchmark.',
    license='MIT',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
