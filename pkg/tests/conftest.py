import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

DATA = HERE.parent / "src" / "sygus" / "data"
CORPUS = DATA / "corpus"
REFERENCE = DATA / "reference"
GOLDEN = HERE / "golden"

# the three-list oracle-constraint example only validates with relaxations on
PERMISSIVE_ONLY = {"oracle_constraint"}


def corpus_names():
    return sorted(p.stem for p in CORPUS.glob("*.sy"))


def read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


@pytest.fixture
def corpus():
    return lambda name: read(CORPUS / f"{name}.sy")


def load_example(name):
    from sygus.session import load_state

    return load_state(read(CORPUS / f"{name}.sy"), permissive=name in PERMISSIVE_ONLY)
