"""Bundled fixture graphs and the node functions that go with them."""

from __future__ import annotations

from .errors import UnknownFixture
from .graph import Graph


def g1() -> Graph:
    # path u1..u5 between b1 and b2, with a pendant boundary node b3 at u3
    return Graph(
        ["u1", "u2", "u3", "u4", "u5"],
        ["b1", "b2", "b3"],
        [
            ("b1", "u1", 1.0),
            ("u1", "u2", 2.0),
            ("u2", "u3", 2.0),
            ("u3", "u4", 2.0),
            ("u4", "u5", 2.0),
            ("u5", "b2", 1.0),
            ("u3", "b3", 2.0),
        ],
    )


def g2() -> Graph:
    return Graph(
        ["u1", "u2"],
        ["b1", "b2"],
        [("b1", "u1", 3.0), ("u1", "u2", 2.0), ("u2", "b2", 2.0)],
    )


def g3() -> Graph:
    return Graph(
        ["u2", "u3"],
        ["b1", "b2"],
        [("b1", "u2", 1.0), ("u2", "u3", 3.0), ("u3", "b2", 2.0)],
    )


GRAPHS = {"g1": g1, "g2": g2, "g3": g3}

# node functions shipped with each fixture: file stem -> (graph name, values, eigenvalue)
FUNCTIONS = {
    "g1_f": ("g1", {"u1": 1.0, "u2": 2 / 3, "u3": 1 / 3, "u4": 2 / 3, "u5": 1.0}, 1.0),
    "g1_g": ("g1", {"u1": 1.0, "u2": 2 / 3, "u3": 1 / 3, "u4": 2 / 3, "u5": 4 / 9}, 1.0),
    "g2_dB": ("g2", {"u1": 1 / 3, "u2": 1 / 2}, 2.0),
    "g3_f1": ("g3", {"u2": 5 / 6, "u3": 1 / 2}, 6 / 5),
    "g3_f2": ("g3", {"u2": 1 / 6, "u3": -1 / 6}, 6.0),
    "g3_f": ("g3", {"u2": 1 / 3, "u3": 1 / 2}, 2.0),
}


def fixture(name: str) -> Graph:
    try:
        return GRAPHS[name]()
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; choose from {sorted(GRAPHS)}") from None


def fixture_functions(name: str) -> dict[str, tuple[dict[str, float], float]]:
    """Node functions (with their eigenvalue) bundled with graph ``name``."""
    if name not in GRAPHS:
        raise UnknownFixture(f"unknown fixture {name!r}")
    return {stem: (vals, lam) for stem, (gname, vals, lam) in FUNCTIONS.items() if gname == name}
