"""Power-sum inequalities used when bounding sums of probabilities raised to a power."""

import numpy as np
from hypothesis import given, strategies as st

nonneg = st.lists(st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False), min_size=1, max_size=64)


@given(nonneg, st.sampled_from([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]))
def test_power_is_subadditive_below_one(a, s):
    a = np.array(a)
    assert a.sum() ** s <= np.power(a, s).sum() * (1 + 1e-12) + 1e-300


@given(nonneg, st.sampled_from([0.5, 1.0, 2.0]), st.randoms(use_true_random=False))
def test_rearranged_powers_never_beat_aligned(a, s, rnd):
    a = np.array(a)
    perm = list(range(a.size))
    rnd.shuffle(perm)
    b = np.power(a, s)[perm]
    assert np.dot(a, b) <= np.power(a, s + 1).sum() * (1 + 1e-12) + 1e-300
