import json

from . import _core
from ._core import (
    complexity,
    decode,
    friedman,
    hommel,
    hypervolume,
    ingest_synthetic,
    nondominated_sort,
    search,
    selftest,
)


def report(out, desk=True, overrides=()):
    return json.loads(_core.report(out, desk, list(overrides)))


__all__ = [
    "complexity",
    "decode",
    "friedman",
    "hommel",
    "hypervolume",
    "ingest_synthetic",
    "nondominated_sort",
    "report",
    "search",
    "selftest",
]
