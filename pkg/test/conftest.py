import filelock
import pytest

from ncdlab.textops import load_frequency_table, read_corpus

from .utils import DESK_DIR, FREQUENCY_LIST, make_desk_corpus


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run the full acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def desk_dir(tmp_path_factory, worker_id):
    """Generates the desk corpus in a shared temporary directory

    This directory is shared by all concurrent test processes
    """
    if worker_id == "master":
        # not executing in with multiple workers, just produce the data and let
        # pytest's fixture caching do its job
        desk_dir = tmp_path_factory.getbasetemp() / "desk"
        make_desk_corpus(desk_dir)
    else:
        root_tmp_dir = tmp_path_factory.getbasetemp().parent
        desk_dir = root_tmp_dir / "desk"
        with filelock.FileLock(str(desk_dir) + ".lock"):
            if not desk_dir.is_dir():
                make_desk_corpus(desk_dir)
    return desk_dir


@pytest.fixture(scope="session")
def desk_docs(desk_dir):
    return read_corpus(desk_dir)


@pytest.fixture(scope="session")
def bundled_docs():
    return read_corpus(DESK_DIR)


@pytest.fixture(scope="session")
def table():
    return load_frequency_table(FREQUENCY_LIST)


@pytest.fixture
def tiny_corpus(tmp_path):
    """Three topics of two short documents, small enough for whole sweeps"""
    directory = tmp_path / "tiny"
    make_desk_corpus(
        directory, per_topic=2, sizes=(400, 600), topics=("astronomy", "baking", "music")
    )
    return directory
