"""Shared random-profile generators for the test suite."""

import numpy as np
from hypothesis import strategies as st

from mppnc.channel import ChannelProfile, Tap

# Filled by tests/test_acceptance.py and printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def random_profile(rng: np.random.Generator, n_taps: int = 2, quad_ok: bool = False) -> ChannelProfile:
    """Random valid profile; with ``quad_ok`` the QUAD window ordering holds."""
    while True:
        delta = float(rng.uniform(0.05, 0.95))
        da = np.sort(rng.uniform(0.01, 1.0, n_taps - 1))
        db = np.sort(rng.uniform(0.01, 1.0 - delta, n_taps - 1))
        if n_taps > 1 and (np.min(np.diff(np.r_[0, da])) < 1e-3 or np.min(np.diff(np.r_[0, db])) < 1e-3):
            continue
        if quad_ok and not (0.01 < da[0] < delta - 0.01 and delta + db[0] < 0.99):
            continue
        ga = np.r_[1.0, rng.uniform(0.1, 1.0, n_taps - 1)]
        gb = np.r_[1.0, rng.uniform(0.1, 1.0, n_taps - 1)]
        pa = rng.uniform(-np.pi, np.pi, n_taps)
        pb = rng.uniform(-np.pi, np.pi, n_taps)
        ta = tuple(Tap(float(g), float(d), float(p)) for g, d, p in zip(ga, np.r_[0, da], pa))
        tb = tuple(Tap(float(g), float(d), float(p)) for g, d, p in zip(gb, np.r_[0, db], pb))
        return ChannelProfile(ta, tb, delta)


@st.composite
def profiles(draw, n_taps: int = 2, quad_ok: bool = False):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_profile(np.random.default_rng(seed), n_taps, quad_ok)
