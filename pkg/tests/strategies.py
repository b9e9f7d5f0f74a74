"""Hypothesis strategies for random valid systems."""
from hypothesis import strategies as st

from cplifs.ifs_core import validate


@st.composite
def pl_maps(draw, max_breaks=2):
    """Raw config for one valid map with small breakpoints and slopes."""
    nb = draw(st.integers(0, max_breaks))
    bps = sorted(draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=nb, max_size=nb, unique=True)))
    if any(b - a < 1e-3 for a, b in zip(bps, bps[1:])):
        bps = bps[:1]
    slope = st.floats(0.05, 0.9).flatmap(lambda r: st.sampled_from([r, -r]))
    rho = [draw(slope)]
    for _ in bps:
        r = draw(slope.filter(lambda r: abs(r - rho[-1]) > 1e-3))
        rho.append(r)
    return {"breakpoints": bps, "slopes": rho, "offset": draw(st.floats(-1, 1))}


@st.composite
def systems_st(draw, max_maps=3, max_breaks=2):
    m = draw(st.integers(2, max_maps))
    return validate([draw(pl_maps(max_breaks)) for _ in range(m)])

