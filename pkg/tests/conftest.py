from __future__ import annotations

import pytest

from corpus_families import CORPUS


@pytest.fixture(scope="session")
def corpus():
    return CORPUS
