from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import train_toy_ranks, training_text

from biasforge.tokenizer import Tokenizer, save_ranks


@pytest.fixture(scope="session")
def toy_ranks() -> dict[bytes, int]:
    return train_toy_ranks(training_text(), num_merges=300)


@pytest.fixture(scope="session")
def toy_tokenizer(toy_ranks) -> Tokenizer:
    return Tokenizer(ranks=dict(toy_ranks), specials={"<|transcribe|>": 1000, "<|prev|>": 1001})


@pytest.fixture(scope="session")
def toy_ranks_file(toy_ranks, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("tok") / "toy.ranks"
    save_ranks(toy_ranks, path)
    return path
