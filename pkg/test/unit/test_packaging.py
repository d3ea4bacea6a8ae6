# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2022 -            Qentinel Group.
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
import os

from setuptools import find_packages

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def test_every_source_directory_is_packaged():
    packages = find_packages(where=ROOT, exclude=["*.test", "*.test.*", "test.*", "test"])
    assert {"UASolver", "UASolver.internal", "UASolver.keywords"} <= set(packages)
    for dirpath, _, filenames in os.walk(os.path.join(ROOT, "UASolver")):
        if any(name.endswith(".py") for name in filenames):
            name = os.path.relpath(dirpath, ROOT).replace(os.sep, ".")
            assert name in packages
