import pytest

from quintic.pipeline import Registry


@pytest.fixture(scope="session")
def registry(tmp_path_factory):
    return Registry(cache=tmp_path_factory.mktemp("cache"))


@pytest.fixture(scope="session")
def built(registry):
    """Memoised ``v -> (doc, trace)`` over the registry."""
    memo = {}

    def get(v):
        if v not in memo:
            memo[v] = registry.build(v)
        return memo[v]

    return get
