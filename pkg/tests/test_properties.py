"""Property-based checks for the numeric invariants."""

import math

from hypothesis import given, settings, strategies as st

from motionlab.clip import AnimationClip, Keyframe
from motionlab.euler import canonicalize_deg, euler_to_matrix, matrix_to_euler
from motionlab.metrics import average_pairwise_agreement, stat_cell, weighted_kappa

angles = st.floats(min_value=-720, max_value=720, allow_nan=False)
ratings = st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=40)


@given(angles)
def test_canonicalize_range(a):
    c = canonicalize_deg(a)
    assert -180 < c <= 180
    # same rotation modulo 360
    assert math.isclose(math.cos(math.radians(a)), math.cos(math.radians(c)), abs_tol=1e-9)
    assert math.isclose(math.sin(math.radians(a)), math.sin(math.radians(c)), abs_tol=1e-9)


@given(st.tuples(angles, angles, angles))
def test_euler_matrix_orthonormal(abc):
    import numpy as np

    mat = euler_to_matrix(abc)
    assert np.allclose(mat @ mat.T, np.eye(3), atol=1e-12)
    assert math.isclose(float(np.linalg.det(mat)), 1.0, abs_tol=1e-12)


@given(st.tuples(angles, angles, angles))
def test_euler_decomposition_reproduces_rotation(abc):
    import numpy as np

    mat = euler_to_matrix(abc)
    back = matrix_to_euler(mat)
    assert np.allclose(euler_to_matrix(back), mat, atol=1e-9)


@settings(max_examples=60)
@given(ratings, ratings)
def test_kappa_symmetric_and_bounded(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    k_ab = weighted_kappa(a, b)
    k_ba = weighted_kappa(b, a)
    assert math.isclose(k_ab, k_ba, abs_tol=1e-12)
    assert k_ab <= 1.0 + 1e-12


@settings(max_examples=60)
@given(ratings)
def test_kappa_reflexive(a):
    assert weighted_kappa(a, a) == 1.0


@settings(max_examples=40)
@given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False),
                min_size=1, max_size=10))
def test_stat_cell_var_is_sd_squared(values):
    cell = stat_cell(values)
    assert cell.var == cell.sd * cell.sd
    assert cell.sd >= 0


@settings(max_examples=40)
@given(st.integers(min_value=2, max_value=5),
       st.integers(min_value=1, max_value=12),
       st.randoms(use_true_random=False))
def test_apa_bounds_and_permutation_invariance(n_raters, n_items, rng):
    categories = ["G", "PG", "B", "NR"]
    labels = {
        f"r{i}": [categories[rng.randrange(4)] for _ in range(n_items)]
        for i in range(n_raters)
    }
    value = average_pairwise_agreement(labels)
    assert 0.0 <= value <= 1.0
    renamed = {f"z{i}": v for i, v in enumerate(labels.values())}
    assert math.isclose(value, average_pairwise_agreement(renamed), abs_tol=1e-12)


@settings(max_examples=40)
@given(st.lists(st.floats(min_value=0.05, max_value=3, allow_nan=False),
                min_size=1, max_size=6),
       st.floats(min_value=0, max_value=1))
def test_interpolation_bounded_by_keyframe_envelope(durations, alpha):
    times = [0.0]
    for d in durations:
        times.append(times[-1] + d)
    values = [(i * 17.0 % 90) - 45 for i in range(len(times))]
    clip = AnimationClip("t", [
        Keyframe(t, {"j": (v, 0.0, 0.0)}) for t, v in zip(times, values)
    ])
    t = alpha * clip.duration
    sampled = clip.sample(t).rotations["j"][0]
    assert min(values) - 1e-9 <= sampled <= max(values) + 1e-9
