import inspect

from api import schema


def test_surface_is_callable():
    for name in schema.__all__:
        if name in ("QUERIES", "MUTATIONS"):
            continue
        assert callable(getattr(schema, name)), name


def test_queries_and_mutations_are_disjoint():
    queries = {f.__name__ for f in schema.QUERIES}
    mutations = {f.__name__ for f in schema.MUTATIONS}
    assert not queries & mutations
    assert all(inspect.isfunction(f) for f in schema.QUERIES + schema.MUTATIONS)
