from __future__ import annotations

import pytest

from helpers import corpus_names, load_corpus


@pytest.fixture(scope="session")
def corpus():
    """name -> (unit, doc, tests) for every shipped program."""
    return {name: load_corpus(name) for name in corpus_names()}
