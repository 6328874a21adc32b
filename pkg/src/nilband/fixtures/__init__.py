"""Bundled algebra descriptions for the worked examples."""
from importlib import resources

from ..algebra import LieAlgebraSpec, parse_spec

FIXTURE_NAMES = ("heisenberg", "example1", "example2", "five_dim", "seven_dim",
                 "region_example", "seven_dim_sampling")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    return resources.files(__name__).joinpath(f"{name}.json").read_text()


def load_fixture(name: str) -> LieAlgebraSpec:
    return parse_spec(fixture_text(name), name=name)
