import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfrs.errors import InvalidInput
from mfrs.geometry import BoundingBox, iou, nms


def box(t, r, b, l):
    return BoundingBox(top=t, right=r, bottom=b, left=l)


def brute_force_nms(boxes, scores, threshold):
    """Quadratic-scan oracle: repeatedly take the best remaining box."""
    remaining = list(range(len(boxes)))
    remaining.sort(key=lambda i: (-scores[i], boxes[i].top, boxes[i].left,
                                  boxes[i].right, boxes[i].bottom))
    kept = []
    while remaining:
        best = remaining.pop(0)
        kept.append(boxes[best])
        remaining = [i for i in remaining if iou(boxes[best], boxes[i]) <= threshold]
    return kept


def test_identical_boxes_iou_one():
    a = box(0, 10, 10, 0)
    assert iou(a, a) == 1.0


def test_disjoint_boxes_iou_zero():
    assert iou(box(0, 10, 10, 0), box(20, 30, 30, 20)) == 0.0


def test_iou_hand_computed():
    # overlap 5x10 = 50, union 150
    a = box(0, 10, 10, 0)
    b = box(0, 15, 10, 5)
    assert iou(a, b) == pytest.approx(1 / 3)


boxes_strategy = st.builds(
    lambda t, l, h, w: box(t, l + w, t + h, l),
    t=st.integers(0, 80), l=st.integers(0, 80),
    h=st.integers(1, 60), w=st.integers(1, 60),
)


@given(a=boxes_strategy, b=boxes_strategy)
def test_iou_symmetric_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0
    if v == 1.0:
        assert a == b


def test_nms_single_box():
    a = box(0, 10, 10, 0)
    assert nms([a], [0.5], 0.3) == [a]


def test_nms_identical_boxes_keeps_higher_score():
    a = box(0, 10, 10, 0)
    assert nms([a, a], [0.8, 0.9], 0.99) == [a]


def test_nms_length_mismatch():
    with pytest.raises(InvalidInput):
        nms([box(0, 10, 10, 0)], [0.5, 0.6], 0.3)


def test_nms_tie_breaks_toward_smaller_corner():
    a = box(5, 15, 15, 5)
    b = box(0, 10, 10, 0)
    kept = nms([a, b], [0.7, 0.7], 0.9)
    assert kept[0] == b


@settings(max_examples=300, deadline=None)
@given(
    data=st.lists(
        st.tuples(boxes_strategy, st.floats(0, 1, allow_nan=False)),
        min_size=0, max_size=12,
    ),
    threshold=st.floats(0.05, 0.95),
)
def test_nms_matches_quadratic_oracle(data, threshold):
    boxes = [d[0] for d in data]
    scores = [d[1] for d in data]
    assert nms(boxes, scores, threshold) == brute_force_nms(boxes, scores, threshold)


@settings(max_examples=100, deadline=None)
@given(
    data=st.lists(
        # coarse score grid keeps scaled scores exactly ordered (no
        # floating-point near-tie flips, which the property excludes)
        st.tuples(boxes_strategy, st.sampled_from([0.25, 0.5, 0.75, 1.0])),
        min_size=1, max_size=10,
    ),
    factor=st.sampled_from([0.125, 0.5, 2.0, 16.0, 37.5]),
)
def test_nms_invariant_to_positive_score_scaling(data, factor):
    boxes = [d[0] for d in data]
    scores = [d[1] for d in data]
    scaled = [s * factor for s in scores]
    assert nms(boxes, scores, 0.3) == nms(boxes, scaled, 0.3)
