import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.chars import CharacterEngine  # noqa: E402
from src.primcheck import PrimitivityChecker  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long exact computations")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long exact computation, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def engine(tmp_path) -> CharacterEngine:
    return CharacterEngine(cache_dir=str(tmp_path / "cache"), cache_enabled=True)


@pytest.fixture
def checker(engine) -> PrimitivityChecker:
    return PrimitivityChecker(engine=engine, search_bound=8, samples=20, seed=42, workers=1)
