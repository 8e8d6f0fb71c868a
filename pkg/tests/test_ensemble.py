import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldpc_wiretap.ensemble import (
    GallagerSpec,
    NestedSpec,
    actual_rate,
    base_matrix,
    code_dimension,
    even_block_counts,
    exact_kernel_prob,
    kernel_prob_fraction,
    log_kernel_prob_table,
    log_q_table,
    sample,
    sample_nested,
    snap,
)
from ldpc_wiretap.ensemble import _layer
from ldpc_wiretap.gf2 import BitWord, Gf2Matrix, kernel_basis, matvec


def feasible_specs(max_n=24):
    """Strategy over feasible (n, R, s) triples."""
    def build(n):
        divisors = [d for d in range(2, n + 1) if n % d == 0]
        return st.sampled_from(divisors).flatmap(
            lambda s: st.integers(1, s - 1).map(lambda L: GallagerSpec(n, Fraction(s - L, s), s)))
    return st.integers(2, max_n).flatmap(build)


def layer_kernel_prob_brute(n, s, w):
    """Fraction of all n! column permutations whose single layer annihilates a fixed weight-w word."""
    v = (1 << w) - 1
    hits = total = 0
    for perm in permutations(range(n)):
        rows = _layer(np.array(perm), s, n // s)
        hits += all((r & v).bit_count() % 2 == 0 for r in rows)
        total += 1
    return Fraction(hits, total)


# ---- construction -----------------------------------------------------------


def test_base_matrix_examples():
    assert base_matrix(4, 2) == Gf2Matrix.from_rows(["1100", "0011"])
    assert base_matrix(2, 1) == Gf2Matrix.identity(2)
    assert base_matrix(6, 3) == Gf2Matrix.from_rows(["111000", "000111"])


@pytest.mark.parametrize("args", [(12, "1/2", 3), (10, "1/2", 3), (8, 1, 4), (8, 0, 4), (4, "1/2", 0)])
def test_spec_rejects_infeasible(args):
    with pytest.raises(ValueError):
        GallagerSpec(*args)


def test_spec_accepts_float_rates():
    assert GallagerSpec(12, 0.75, 4).rate == Fraction(3, 4)


@settings(max_examples=60, deadline=None)
@given(feasible_specs(), st.integers(0, 2**32))
def test_sample_structure(spec, seed):
    H = sample(spec, seed)
    assert (H.m, H.n) == (spec.rows, spec.n)
    A = H.to_array().astype(int)
    assert (A.sum(axis=1) == spec.s).all()
    for i in range(spec.layers):
        layer = A[i * spec.blocks:(i + 1) * spec.blocks]
        assert (layer.sum(axis=0) == 1).all()
    assert H == sample(spec, seed)
    assert actual_rate(H) >= float(spec.rate) - 1e-12


def test_sample_small_example():
    spec = GallagerSpec(4, "1/2", 2)
    for seed in range(20):
        A = sample(spec, seed).to_array()
        assert A.shape == (2, 4)
        assert A.sum(axis=1).tolist() == [2, 2]
        assert A.sum(axis=0).tolist() == [1, 1, 1, 1]


def test_sample_depends_on_seed():
    spec = GallagerSpec(24, "1/2", 4)
    assert len({sample(spec, s).rows for s in range(10)}) > 1


def test_sample_kernel_frequency_small():
    spec = GallagerSpec(4, "1/2", 2)
    v = BitWord.from_str("1010")
    N = 10_000
    hits = sum(matvec(sample(spec, seed), v).value == 0 for seed in range(N))
    sigma = math.sqrt((1 / 3) * (2 / 3) / N)
    assert abs(hits / N - 1 / 3) <= 3 * sigma


def test_nested_rows_and_kernel():
    spec = NestedSpec(8, "3/4", "1/2", 4)
    H_B, H_E = sample_nested(spec, 7)
    assert (H_B.m, H_E.m) == (2, 4)
    assert spec.difference.rows == 2
    assert H_E.rows[:2] == H_B.rows


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(8, "3/4", "1/2", 4), (12, "3/4", "1/2", 4), (12, "2/3", "1/3", 3),
                        (10, "4/5", "2/5", 5), (16, "3/4", "1/4", 4)]),
       st.integers(0, 2**40))
def test_nested_pairs_are_nested(args, seed):
    spec = NestedSpec(*args)
    H_B, H_E = sample_nested(spec, seed)
    for v in kernel_basis(H_E):
        assert matvec(H_B, v).value == 0
    assert code_dimension(H_E) <= code_dimension(H_B)


def test_nested_rejects_bad_rates():
    with pytest.raises(ValueError):
        NestedSpec(8, "1/2", "3/4", 4)
    with pytest.raises(ValueError):
        NestedSpec(12, "3/4", "1/2", 3)


# ---- kernel probability ----------------------------------------------------


def test_kernel_prob_examples():
    spec = GallagerSpec(4, "1/2", 2)
    assert kernel_prob_fraction(spec, 2) == Fraction(1, 3)
    assert exact_kernel_prob(spec, 2) == pytest.approx(1 / 3, abs=1e-15)
    assert exact_kernel_prob(spec, 1) == 0.0
    assert exact_kernel_prob(spec, 3) == 0.0
    assert exact_kernel_prob(spec, 4) == 1.0
    with pytest.raises(ValueError):
        exact_kernel_prob(spec, 0)


@pytest.mark.parametrize("n,s", [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4)])
def test_layer_probability_matches_permutation_enumeration(n, s):
    spec = GallagerSpec(n, Fraction(s - 1, s), s)  # one layer
    for w in range(1, n + 1):
        assert kernel_prob_fraction(spec, w) == layer_kernel_prob_brute(n, s, w)


def test_multi_layer_is_a_power():
    one = GallagerSpec(12, Fraction(3, 4), 4)
    three = GallagerSpec(12, Fraction(1, 4), 4)
    for w in range(1, 12):
        assert kernel_prob_fraction(three, w) == kernel_prob_fraction(one, w) ** 3


@pytest.mark.parametrize("n,s", [(4, 2), (6, 3), (8, 4), (9, 3), (10, 2), (12, 4), (12, 6)])
def test_even_block_counts_by_enumeration(n, s):
    counts = [0] * (n + 1)
    for v in range(1 << n):
        if all(((v >> (b * s)) & ((1 << s) - 1)).bit_count() % 2 == 0 for b in range(n // s)):
            counts[v.bit_count()] += 1
    assert list(even_block_counts(n, s)) == counts


@given(feasible_specs(40))
def test_kernel_prob_symmetry_and_parity(spec):
    for w in range(1, spec.n + 1):
        q = kernel_prob_fraction(spec, w)
        if w % 2:
            assert q == 0
        if spec.s % 2 == 0 and w < spec.n:
            assert q == kernel_prob_fraction(spec, spec.n - w)
    if spec.s % 2 == 0:
        assert kernel_prob_fraction(spec, spec.n) == 1


@pytest.mark.parametrize("n,s", [(64, 2), (64, 4), (96, 3), (120, 5), (256, 8), (510, 17), (512, 64), (512, 512)])
def test_tilted_route_matches_exact(n, s):
    exact = log_q_table(n, s, "exact")
    tilted = log_q_table(n, s, "tilted")
    finite = np.isfinite(exact)
    assert (np.isfinite(tilted) == finite).all()
    assert np.allclose(tilted[finite], exact[finite], rtol=1e-9, atol=1e-9)


def test_log_kernel_table_large_n_is_finite():
    spec = GallagerSpec(1 << 14, Fraction(1, 2), 16)
    lk = log_kernel_prob_table(spec)
    assert np.isfinite(lk[2::2]).all()
    assert np.isneginf(lk[1::2]).all()
    assert (lk <= 1e-12).all()


# ---- snapping --------------------------------------------------------------


def test_snap_examples():
    spec, report = snap(12, "1/2", 3)
    assert (spec.n, spec.rate, spec.s) == (12, Fraction(1, 3), 3)
    assert report["changed"]
    spec, report = snap(12, "1/2", 4)
    assert (spec.rate, spec.s) == (Fraction(1, 2), 4)
    assert not report["changed"]
    spec, _ = snap(10, "1/2", 3)
    assert spec.s == 2


@given(st.integers(2, 64), st.fractions(Fraction(1, 20), Fraction(19, 20)), st.integers(1, 70))
def test_snap_is_always_feasible(n, rate, s):
    spec, _ = snap(n, rate, s)
    assert GallagerSpec(spec.n, spec.rate, spec.s) == spec
