import pytest

from opteleport.algebra import StarAlgebra
from opteleport.inclusion import (
    Inclusion,
    diagonal_in_full,
    homogeneous_in_full,
    markov_inclusion,
    trivial_in_full,
)
from opteleport.tower import Tower, basic_construction, iterate


def make_inclusion(key: str) -> Inclusion:
    if key.startswith("trivial_in_full_"):
        return trivial_in_full(int(key.rsplit("_", 1)[1]))
    if key.startswith("diagonal_in_full_"):
        return diagonal_in_full(int(key.rsplit("_", 1)[1]))
    if key == "homogeneous_2_2":
        return homogeneous_in_full(2, 2)
    if key == "scalars_in_direct_sum":
        big = StarAlgebra.block_diagonal([(1, 1), (2, 1)])
        return markov_inclusion(StarAlgebra.trivial(3), big)
    raise KeyError(key)


TOWER_KEYS = [
    "trivial_in_full_2",
    "trivial_in_full_3",
    "diagonal_in_full_2",
    "diagonal_in_full_3",
    "homogeneous_2_2",
    "scalars_in_direct_sum",
]

_tower_cache: dict[str, Tower] = {}


def get_tower(key: str, two_levels: bool = True) -> Tower:
    if key not in _tower_cache:
        _tower_cache[key] = basic_construction(make_inclusion(key))
    t = _tower_cache[key]
    if two_levels:
        iterate(t)
    return t


@pytest.fixture(scope="session")
def tower_factory():
    return get_tower
