"""Bounding boxes, overlap ratios and non-maximum suppression."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInput


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Face location. Serialization order is (top, right, bottom, left);
    right and bottom are exclusive."""

    top: int
    right: int
    bottom: int
    left: int

    def __post_init__(self):
        if self.top >= self.bottom or self.left >= self.right:
            raise ValueError(f"degenerate box {self.as_tuple()}")
        if self.top < 0 or self.left < 0:
            raise ValueError(f"negative coordinates in {self.as_tuple()}")

    def as_tuple(self):
        return (self.top, self.right, self.bottom, self.left)

    @property
    def width(self):
        return self.right - self.left

    @property
    def height(self):
        return self.bottom - self.top

    @property
    def area(self):
        return self.width * self.height

    def center(self):
        return ((self.left + self.right) / 2.0, (self.top + self.bottom) / 2.0)

    def fits(self, width, height):
        return self.bottom <= height and self.right <= width

    def to_json(self):
        return {"top": self.top, "right": self.right, "bottom": self.bottom, "left": self.left}

    @classmethod
    def from_json(cls, obj):
        return cls(top=obj["top"], right=obj["right"], bottom=obj["bottom"], left=obj["left"])


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union, 0 when disjoint."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def nms(boxes, scores, iou_threshold):
    """Greedy non-maximum suppression.

    Repeatedly keeps the highest-scoring box and drops every remaining
    box overlapping it with IoU > threshold. Score ties break toward the
    smaller (top, left) corner. Returns survivors best-first.
    """
    if len(boxes) != len(scores):
        raise InvalidInput(f"{len(boxes)} boxes vs {len(scores)} scores")
    order = sorted(
        range(len(boxes)),
        key=lambda i: (-scores[i], boxes[i].top, boxes[i].left, boxes[i].right, boxes[i].bottom),
    )
    kept = []
    suppressed = [False] * len(boxes)
    for i in order:
        if suppressed[i]:
            continue
        kept.append(boxes[i])
        for j in order:
            if not suppressed[j] and j != i and iou(boxes[i], boxes[j]) > iou_threshold:
                suppressed[j] = True
    return kept
