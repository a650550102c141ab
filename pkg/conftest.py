"""Shared pytest fixtures: the shipped shadow and front catalog."""

import random
from pathlib import Path

import pytest

from config import DEFAULT_FIXTURES, Settings
from errors import MoveError
from front import load_front
from shadow_core import generate_pn, load_shadow, move_join_nonpreferred, move_one_two

FIXTURES = Path(DEFAULT_FIXTURES)

SHADOW_FIXTURES = (
    "seed_one_vertex.bsh",
    "sphere_spine.bsh",
    "spine_solid_torus.bsh",
    "f1_pn2.bsh",
    "solid_torus_embedded.bsh",
)
FRONT_CORPUS = ("two_eyes.fr", "two_eyes_cw.fr", "kinked.fr", "kinked_cw.fr", "kinked_zigzag.fr")


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in (
        "SHADOWSTEIN_FIXTURES",
        "SHADOWSTEIN_CAP",
        "SHADOWSTEIN_CAP_CEILING",
        "SHADOWSTEIN_ENUM_LIMIT",
        "SHADOWSTEIN_POLYAK_TABLE",
        "SHADOWSTEIN_LOG_LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def fixture_text():
    def read(name: str) -> str:
        return (FIXTURES / name).read_text(encoding="utf-8")

    return read


@pytest.fixture
def shadow():
    def load(name: str):
        return load_shadow(FIXTURES / name)

    return load


@pytest.fixture
def front():
    def load(name: str):
        return load_front(FIXTURES / name)

    return load


def grown_shadows(load, count=12, seed=7):
    """Fixtures plus shadows grown from them by random 1->2 moves, each followed by a random join."""
    rng = random.Random(seed)
    found = [load(name) for name in SHADOW_FIXTURES]
    found += [generate_pn(n) for n in (3, 4)]
    pool = list(found)
    attempts = 0
    while len(found) < len(pool) + count and attempts < 10 * count:
        attempts += 1
        base = rng.choice(found)
        if base.n_vertices > 6:
            continue
        try:
            grown = move_one_two(base, rng.randrange(base.n_vertices), rng.randrange(8))
        except MoveError:
            continue
        found.append(grown)
        try:
            found.append(move_join_nonpreferred(grown, rng.randrange(grown.n_edges)))
        except MoveError:
            continue
    return found
