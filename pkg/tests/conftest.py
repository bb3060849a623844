"""Shared, cached results for the expensive constructions."""

import functools

import pytest


@functools.lru_cache(maxsize=None)
def converted(weight):
    from overhang.shield import convert

    return convert(weight)


@functools.lru_cache(maxsize=None)
def brickwall(target, symmetric):
    from overhang.search.brickwall import best_of_seeds

    return best_of_seeds(target, symmetric=symmetric)


@functools.lru_cache(maxsize=None)
def standard4():
    from overhang.search.brickwall import standard_search

    return standard_search(4)


@functools.lru_cache(maxsize=None)
def exhaustive(n):
    from overhang.search.structures import exhaustive_D

    return exhaustive_D(n)


@pytest.fixture(scope="session")
def cache():
    class Cache:
        pass

    c = Cache()
    c.converted = converted
    c.brickwall = brickwall
    c.standard4 = standard4
    c.exhaustive = exhaustive
    return c


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
