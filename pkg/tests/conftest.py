import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mtcrit.corpus import load_corpus

MINI_CORPUS = Path(__file__).parent.parent / "src" / "mtcrit" / "data" / "mini_corpus.jsonl"


@pytest.fixture(scope="session")
def mini_corpus_path():
    return MINI_CORPUS


@pytest.fixture()
def mini_corpus():
    return load_corpus(MINI_CORPUS)
