import pytest

from fpreflect.potential import build_profile, catalog, parse_potential


@pytest.fixture(scope="session")
def profiles():
    cache = {}

    def get(name, order=6):
        key = (name, order)
        if key not in cache:
            spec = catalog(name) if name.partition(":")[0] in _CATALOG else parse_potential(name)
            cache[key] = build_profile(spec, order)
        return cache[key]

    return get


_CATALOG = {"linear", "parabolic", "exp-growth", "exp-decay", "logcosh", "sqrt-growth", "log-growth", "kink"}
