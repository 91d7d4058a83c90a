from __future__ import annotations

from pathlib import Path

import pytest

from treegram.treebank import build_tag_lexicon, prepare_treebank
from treegram.trees import parse_bracketed

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load(name: str) -> list:
    return parse_bracketed((DATA / name).read_text(encoding="utf-8"))


def prepared(name: str, order: int = 0) -> list:
    return prepare_treebank(load(name), order)


@pytest.fixture
def figure2():
    """The Figure 2 tree, heads and complements marked, no pre-heads."""
    return prepared("figure2.mrg")[0]


@pytest.fixture
def figure4():
    return prepared("figure4.mrg")[0]


@pytest.fixture
def toy20_raw():
    return load("toy20.mrg")


def lexicon_of(treebank):
    return build_tag_lexicon(treebank)
