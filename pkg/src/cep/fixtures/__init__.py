"""Golden termsheets: forest planting, offshore wind and coal power project bonds."""

from importlib import resources

NAMES = ("forest", "wind", "coal", "coal_listed")


def fixture_text(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.json").read_text(encoding="utf-8")
