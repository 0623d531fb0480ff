import pytest


def pytest_addoption(parser):
    parser.addoption("--large", action="store_true", default=False,
                     help="run the large cp-rank instances (Kronecker powers 2 and 3)")


def pytest_configure(config):
    config.addinivalue_line("markers", "large: needs --large")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--large"):
        return
    skip = pytest.mark.skip(reason="needs --large")
    for item in items:
        if "large" in item.keywords:
            item.add_marker(skip)
