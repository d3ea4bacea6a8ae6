# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2014 -            Qentinel Group.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ---------------------------

from setuptools import find_packages, setup

version = {}
with open('UASolver/_version.py', encoding='utf-8') as f:
    exec(f.read(), version)  # pylint: disable=exec-used

setup(
    name="UASolver",
    version=version['__version__'],
    description="Uniformly accurate integration of ODEs with several fast time scales",
    long_description=open('README.md', encoding='utf-8').read(),
    long_description_content_type='text/markdown',
    zip_safe=False,
    packages=find_packages(exclude=["*.test", "*.test.*", "test.*", "test"]),
    package_data={"UASolver": ["presets/*.json"]},
    entry_points={"console_scripts": ["uasolver=UASolver.__main__:cli"]},

    classifiers=[
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'License :: OSI Approved :: Apache Software License',
        'Framework :: Robot Framework',
        'Framework :: Robot Framework :: Library',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],

    keywords='multiscale ode solver uniform accuracy robot framework',
    python_requires=">=3.9,<4.0",
    license="Apache License 2.0",
    install_requires=["setuptools",
                      "robotframework>=4.0",
                      "numpy>=1.21",
                      "scipy>=1.7.3",
                      "sympy>=1.9"],
)
