import pytest

from qglab import catalog


@pytest.fixture(scope="session")
def c_z2():
    return catalog.builtin("c_z2")


@pytest.fixture(scope="session")
def c_z3():
    return catalog.builtin("c_z3")


@pytest.fixture(scope="session")
def c_z4():
    return catalog.builtin("c_z4")


@pytest.fixture(scope="session")
def c_s3():
    return catalog.builtin("c_s3")


@pytest.fixture(scope="session")
def cg_s3():
    return catalog.builtin("cg_s3")


@pytest.fixture(scope="session")
def cg_z4():
    return catalog.builtin("cg_z4")


def s3_subgroup(label_set):
    """Index set of a subgroup of S3 given by element labels."""
    _, labels = catalog.group_table("s3")
    return frozenset(labels.index(x) for x in label_set)
