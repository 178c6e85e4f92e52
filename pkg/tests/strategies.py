"""Hypothesis strategies shared by the property tests."""

import math

import numpy as np
from hypothesis import strategies as st

from uqsl import linalg as la


@st.composite
def density_matrices(draw, min_dim=2, max_dim=5, full_rank=False):
    d = draw(st.integers(min_dim, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    rank = d if full_rank else draw(st.integers(1, d))
    return la.random_density(d, rng, rank)


@st.composite
def bloch_params(draw, max_r=1.0):
    r = draw(st.floats(0.0, max_r))
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(st.floats(0.0, 2 * math.pi, exclude_max=True))
    return la.BlochParams(r, theta, phi)


alphas_below_one = st.floats(0.05, 0.95)
mus_unit = st.floats(0.0, 1.0)
