# !/usr/bin/env python
# -*- coding: utf-8 -*-


def main():
    from setuptools import setup, find_packages

    version_dict = {}
    init_filename = "floqmet/version.py"
    exec(
        compile(open(init_filename, "r").read(), init_filename, "exec"),
        version_dict)

    setup(name="floqmet",
          version=version_dict["VERSION_TEXT"],
          description=("Floquet-engineered GHZ metrology of an atom coupled "
                       "to a structured lattice reservoir"),
          long_description=open("README.md", "rt").read(),
          long_description_content_type="text/markdown",
          author="The floqmet developers",
          license="MIT",
          classifiers=[
              "Development Status :: 3 - Alpha",
              "Intended Audience :: Science/Research",
              "License :: OSI Approved :: MIT License",
              "Natural Language :: English",
              "Programming Language :: Python",
              "Programming Language :: Python :: 3.8",
              "Programming Language :: Python :: 3.9",
              "Programming Language :: Python :: 3.10",
              "Topic :: Scientific/Engineering",
              "Topic :: Scientific/Engineering :: Physics",
              "Topic :: Scientific/Engineering :: Mathematics",
              ],

          packages=find_packages(include=["floqmet", "floqmet.*"]),

          python_requires="~=3.8",

          install_requires=[
              "numpy>=1.20",
              "scipy>=1.7",
              "mpi4py>=3",
              "pytest>=2.3",
              "pytools>=2018.5.2",
              "pymbolic>=2013.2",
              ],

          entry_points={
              "console_scripts": [
                  "floqmet=floqmet.cli:console_main",
                  ],
              })


if __name__ == "__main__":
    main()
