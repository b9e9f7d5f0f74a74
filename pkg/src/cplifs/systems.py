"""Reference systems used by tests, scripts and the CLI configs."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .ifs_core import Cplifs, from_similarities, validate


def cantor() -> Cplifs:
    """Middle-thirds Cantor system ``{x/3, x/3 + 2/3}``."""
    return from_similarities([("1/3", "0"), ("1/3", "2/3")])


def full_interval() -> Cplifs:
    """``{x/2, x/2 + 1/2}``, attractor ``[0, 1]``."""
    return from_similarities([("1/2", "0"), ("1/2", "1/2")])


def overlap_triple() -> Cplifs:
    """``{x/2, x/2 + 1/2, x/2 + 1/4}``; words 12 and 31 coincide."""
    return from_similarities([("1/2", "0"), ("1/2", "1/2"), ("1/2", "1/4")])


def broken_zero(eps=None) -> Cplifs:
    """``f1`` with slopes 2/5, 1/5 meeting at 0 and ``f2 = x/3 (+ eps)``.

    Without ``eps`` every branch fixes 0, so the generated self-similar
    system has exact overlaps.  Any ``eps > 0`` separates the system.
    """
    f2_offset = "0" if eps is None else eps
    return validate([
        {"breakpoints": ["0"], "slopes": ["2/5", "1/5"], "offset": "0"},
        {"breakpoints": [], "slopes": ["1/3"], "offset": f2_offset},
    ])


def broken_cantor() -> Cplifs:
    """Cantor-like system whose first map bends at 2/5, a point between the first-level images."""
    return validate([
        {"breakpoints": ["2/5"], "slopes": ["1/4", "1/5"], "offset": "0"},
        {"breakpoints": [], "slopes": ["1/3"], "offset": "2/3"},
    ])


def flipped_cantor() -> Cplifs:
    """Orientation-reversing first map: ``{-x/3 + 1/3, x/3 + 2/3}``."""
    return from_similarities([("-1/3", "1/3"), ("1/3", "2/3")])


def three_map() -> Cplifs:
    """``{x/4, x/4 + 3/8, x/4 + 3/4}``, strongly separated."""
    return from_similarities([("1/4", "0"), ("1/4", "3/8"), ("1/4", "3/4")])


def tent_pair() -> Cplifs:
    """First map is a tent with peak 1/4 at 1/2; second map lies above its image."""
    return validate([
        {"breakpoints": ["1/2"], "slopes": ["1/2", "-1/3"], "offset": "0"},
        {"breakpoints": [], "slopes": ["1/5"], "offset": "4/5"},
    ])


def thick_pair() -> Cplifs:
    """``{0.7x, 0.7x + 0.3}``: overlapping first-level images covering ``[0, 1]``."""
    return validate([
        {"breakpoints": [], "slopes": ["7/10"], "offset": "0"},
        {"breakpoints": [], "slopes": ["7/10"], "offset": "3/10"},
    ])


REFERENCE_SYSTEMS = {
    "cantor": cantor,
    "full_interval": full_interval,
    "overlap_triple": overlap_triple,
    "broken_zero": broken_zero,
    "broken_cantor": broken_cantor,
    "flipped_cantor": flipped_cantor,
    "three_map": three_map,
    "tent_pair": tent_pair,
    "thick_pair": thick_pair,
}


def random_separated_system(rng: np.random.Generator, with_breakpoint: bool = False) -> Cplifs:
    """Two maps of ``[0, 1]`` whose first-level images are disjoint.

    The left map sends ``[0, 1]`` into ``[0, 0.4]`` and the right one into
    ``[0.5, 1]``.  With ``with_breakpoint`` the left map bends once.
    """
    r2 = rng.uniform(0.1, 0.5)
    if with_breakpoint:
        c = rng.uniform(0.2, 0.8)
        a, b = rng.uniform(0.1, 0.4, size=2)
        while abs(a - b) < 0.02:
            b = rng.uniform(0.1, 0.4)
        left = {"breakpoints": [c], "slopes": [a, b], "offset": 0.0}
    else:
        r1 = rng.uniform(0.1, 0.4)
        if rng.random() < 0.5:
            left = {"breakpoints": [], "slopes": [r1], "offset": 0.0}
        else:
            left = {"breakpoints": [], "slopes": [-r1], "offset": r1}
    right = {"breakpoints": [], "slopes": [r2], "offset": 1.0 - r2}
    return validate([left, right])


def to_config(F: Cplifs) -> dict:
    """JSON-ready config; rationals become ``"p/q"`` strings."""
    def enc(x):
        return str(x) if isinstance(x, Fraction) else float(x)

    return {"maps": [{"breakpoints": [enc(b) for b in f.breakpoints],
                      "slopes": [enc(r) for r in f.slopes],
                      "offset": enc(f.offset)} for f in F.maps]}
