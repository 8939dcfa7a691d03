import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfrs.errors import InvalidEncoding
from mfrs.recognition import MatchConfig, best_match, compare_faces, face_distance
from mfrs.rng import uniform_array


def unit(seed):
    v = uniform_array(seed, 128, -1.0, 1.0)
    return v / np.sqrt((v * v).sum())


def basis(i):
    v = np.zeros(128)
    v[i] = 1.0
    return v


def sum_of_squares_distance(a, b):
    """Independent oracle: plain Python accumulation."""
    total = 0.0
    for x, y in zip(a, b):
        total += (x - y) ** 2
    return math.sqrt(total)


def test_distance_to_self_is_zero():
    v = unit(1)
    assert face_distance(v, v) == 0.0


def test_orthogonal_units_sqrt_two():
    assert face_distance(basis(0), basis(1)) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_distance_matches_oracle_100_pairs():
    for seed in range(100):
        a, b = unit(2 * seed + 100), unit(2 * seed + 101)
        assert face_distance(a, b) == pytest.approx(sum_of_squares_distance(a, b), abs=1e-12)


def test_distance_symmetric():
    a, b = unit(900), unit(901)
    assert face_distance(a, b) == face_distance(b, a)


def test_distance_length_mismatch():
    with pytest.raises(InvalidEncoding):
        face_distance(np.zeros(128), np.zeros(64))


def test_compare_empty_known():
    assert compare_faces([], unit(1)) == []


def test_compare_self_matches():
    v = unit(3)
    assert compare_faces([v], v, MatchConfig(tolerance=0.6)) == [True]


def test_compare_orthogonal_false():
    cand = basis(0)
    assert compare_faces([cand, basis(1)], cand, MatchConfig(tolerance=0.6)) == [True, False]


def test_boundary_distance_equal_tolerance_matches():
    a, b = unit(4), unit(5)
    tol = face_distance(a, b)
    assert compare_faces([b], a, MatchConfig(tolerance=tol)) == [True]


@settings(max_examples=200, deadline=None)
@given(
    seeds=st.lists(st.integers(0, 10_000), min_size=0, max_size=8),
    cand_seed=st.integers(0, 10_000),
    tol=st.floats(0.0, 2.5, allow_nan=False),
)
def test_compare_matches_bruteforce_oracle(seeds, cand_seed, tol):
    known = [unit(s + 20_000) for s in seeds]
    cand = unit(cand_seed + 50_000)
    expected = [sum_of_squares_distance(k, cand) <= tol for k in known]
    got = compare_faces(known, cand, MatchConfig(tolerance=tol))
    # oracle distance and engine distance agree well inside float noise
    assert got == expected


def test_best_match_empty_absent():
    assert best_match([], unit(1)) is None


def test_best_match_picks_minimum():
    cand = basis(0)
    near = 0.98 * basis(0) + 0.199 * basis(1)
    near /= np.sqrt((near * near).sum())
    far = 0.9 * basis(0) + 0.436 * basis(1)
    far /= np.sqrt((far * far).sum())
    result = best_match([(7, far), (9, near)], cand, MatchConfig(tolerance=0.6))
    assert result.index == 1
    assert result.matched


def test_best_match_tie_prefers_smaller_person_id():
    cand = basis(0)
    twin = basis(1)
    result = best_match([(7, twin), (3, twin)], cand, MatchConfig(tolerance=2.0))
    assert result.index == 1  # person 3


def test_best_match_nothing_within_tolerance():
    assert best_match([(1, basis(1))], basis(0), MatchConfig(tolerance=0.6)) is None


def test_negative_tolerance_rejected():
    with pytest.raises(ValueError):
        MatchConfig(tolerance=-0.1)
