"""Probability-of-superiority scoring of spatial relations between mass maps.

The statistic at the bottom of everything is P(X >= Y) for X, Y drawn
independently from two discrete distributions. Two-dimensional mass maps
(binary segmentation masks or attention maps) are projected onto a
direction vector, binned, and compared with that statistic; the relation
score is the clamped difference between the forward and backward
directional values, so tie mass cancels and the score lives in [0, 1].

Ties are counted as superiority (the inner sum starts at equality), which
makes P(X >= Y) + P(Y >= X) = 1 + P(X = Y); the clamped difference is
unaffected by that convention.

Implementation note: the backward directional value is computed as the
forward statistic with the operands swapped, which is the same real number
as projecting onto the negated axis. Keeping one code path makes the
swap and mirror symmetries of the score hold exactly, not merely within
floating-point tolerance; on integer-weighted inputs (binary masks) every
intermediate sum is an exactly represented integer, so they hold bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DimensionMismatchError, EmptyMapError
from .relations import RelationKind, RelationSpec

_NORM_TOL = 1e-9

DEPTH_BINS_DEFAULT = 256
THRESHOLD_DEFAULT = 0.5


def _as_nonneg_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} must be finite")
    if arr.size and float(arr.min()) < 0.0:
        raise ContractViolationError(f"{name} must be nonnegative")
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteDistribution1D:
    """Probability masses on the integer grid [start, start + len - 1].

    Construction normalizes the given masses and rejects a zero total.
    The raw (pre-normalization) masses are kept internally so that
    superiority sums over count-valued inputs stay exact.
    """

    start: int
    masses: np.ndarray

    def __post_init__(self) -> None:
        raw = _as_nonneg_array(self.masses, "masses")
        if raw.ndim != 1 or raw.size == 0:
            raise ContractViolationError("masses must be a nonempty 1D vector")
        total = float(raw.sum())
        if total <= 0.0:
            raise ContractViolationError("total mass must be positive")
        normalized = raw / total
        raw.setflags(write=False)
        normalized.setflags(write=False)
        object.__setattr__(self, "masses", normalized)
        object.__setattr__(self, "_raw", raw)
        object.__setattr__(self, "_total", total)

    def __len__(self) -> int:
        return self.masses.size

    @property
    def stop(self) -> int:
        """Exclusive end of the support grid."""
        return self.start + self.masses.size

    @classmethod
    def point(cls, index: int) -> "DiscreteDistribution1D":
        return cls(index, np.ones(1))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.masses)


def _require_normalized(d: DiscreteDistribution1D) -> None:
    if abs(float(d.masses.sum()) - 1.0) > _NORM_TOL:
        raise ContractViolationError("distribution is not normalized")


def _pos_with_gap(a: DiscreteDistribution1D, b: DiscreteDistribution1D, gap: int) -> float:
    """P(index(X) >= index(Y) + gap) for X ~ a, Y ~ b.

    Works on the raw masses and divides by the totals once, so integer
    counts stay exact regardless of summation order.
    """
    a_raw = a._raw
    suffix = np.cumsum(a_raw[::-1])[::-1]
    lowest = b.start + np.arange(len(b), dtype=np.int64) + gap
    k = lowest - a.start
    super_mass = np.zeros(len(b))
    super_mass[k <= 0] = a._total
    inside = (k > 0) & (k < len(a))
    super_mass[inside] = suffix[k[inside]]
    return float(np.dot(b._raw, super_mass) / (a._total * b._total))


def pos_discrete(a: DiscreteDistribution1D, b: DiscreteDistribution1D) -> float:
    """Probability that a draw from `a` is at least a draw from `b`.

    Equals the double sum over both supports of the product masses with
    the inner index running from the outer one upward, i.e. ties count.
    """
    _require_normalized(a)
    _require_normalized(b)
    return _pos_with_gap(a, b, 0)


def tie_mass(a: DiscreteDistribution1D, b: DiscreteDistribution1D) -> float:
    """Probability that independent draws from `a` and `b` coincide."""
    _require_normalized(a)
    _require_normalized(b)
    lo = max(a.start, b.start)
    hi = min(a.stop, b.stop)
    if hi <= lo:
        return 0.0
    sa = a._raw[lo - a.start : hi - a.start]
    sb = b._raw[lo - b.start : hi - b.start]
    return float(np.dot(sa, sb) / (a._total * b._total))


def pos_distance(
    a: DiscreteDistribution1D,
    b: DiscreteDistribution1D,
    c: float,
    bin_width: float = 1.0,
) -> float:
    """P(X > Y + c), the strict superiority beyond a separation of c.

    Fractional separations round the comparison boundary upward
    (ceil(c / bin_width) index steps), which never rewards sub-threshold
    separation.
    """
    if c < 0:
        raise ContractViolationError("separation c must be nonnegative")
    _require_normalized(a)
    _require_normalized(b)
    shift = max(0, math.ceil(c / bin_width - 1e-9))
    return _pos_with_gap(a, b, shift + 1)


# ---------------------------------------------------------------------------
# Mass maps and projections


@dataclass(frozen=True, eq=False)
class MassMap2D:
    """Nonnegative weight grid over pixels, stored row-major as (height, width).

    A zero-total map is constructible (detections can come back empty) but
    scoring operations reject it; callers turn emptiness into presence
    flags instead.
    """

    width: int
    height: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ContractViolationError("width and height must be positive")
        arr = _as_nonneg_array(self.weights, "weights")
        if arr.size != self.width * self.height:
            raise ContractViolationError(
                f"weights length {arr.size} != width*height {self.width * self.height}"
            )
        arr = np.ascontiguousarray(arr.reshape(self.height, self.width))
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @classmethod
    def from_array(cls, grid) -> "MassMap2D":
        arr = np.asarray(grid, dtype=np.float64)
        if arr.ndim != 2:
            raise ContractViolationError("grid must be 2D")
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def is_empty(self) -> bool:
        return self.total_weight == 0.0

    def is_binary(self) -> bool:
        return bool(np.all((self.weights == 0.0) | (self.weights == 1.0)))


@dataclass(frozen=True)
class ProjectionAxis:
    """A unit planar direction to project onto, or the symbolic depth axis.

    `depth` is 0 for planar axes, +1 for the axis of increasing quantized
    depth (away from the camera) and -1 for its negation. Image rows grow
    downward, so (0, -1) projects "up".
    """

    vx: float = 0.0
    vy: float = 0.0
    bin_width: float = 1.0
    depth: int = 0

    def __post_init__(self) -> None:
        if self.bin_width <= 0 or not math.isfinite(self.bin_width):
            raise ContractViolationError("bin_width must be positive")
        if self.depth not in (-1, 0, 1):
            raise ContractViolationError("depth must be -1, 0, or +1")
        if self.depth == 0:
            if abs(math.hypot(self.vx, self.vy) - 1.0) > 1e-9:
                raise ContractViolationError("planar axis must be a unit vector")
        elif self.vx != 0.0 or self.vy != 0.0:
            raise ContractViolationError("a depth axis has no planar components")

    @classmethod
    def depth_axis(cls, toward_camera: bool = False, bin_width: float = 1.0) -> "ProjectionAxis":
        return cls(0.0, 0.0, bin_width, -1 if toward_camera else 1)

    def negated(self) -> "ProjectionAxis":
        if self.depth:
            return ProjectionAxis(0.0, 0.0, self.bin_width, -self.depth)
        return ProjectionAxis(-self.vx, -self.vy, self.bin_width)


def _require_same_dims(a, b) -> None:
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def _require_evidence(m: MassMap2D, name: str) -> None:
    if m.is_empty:
        raise EmptyMapError(f"{name} has zero total weight")


def _projection_bins(m: MassMap2D, axis: ProjectionAxis) -> tuple[np.ndarray, int]:
    """Per-pixel bin indices over the full grid, plus the bin count.

    The bin grid covers the whole pixel grid (not just occupied pixels),
    so two maps with equal dimensions share comparable bin indices.
    """
    xs = np.arange(m.width, dtype=np.float64)
    ys = np.arange(m.height, dtype=np.float64)
    t = axis.vx * xs[None, :] + axis.vy * ys[:, None]
    t_min = float(t.min())
    t_max = float(t.max())
    n_bins = int(math.floor((t_max - t_min) / axis.bin_width + 1e-9)) + 1
    bins = np.floor((t - t_min) / axis.bin_width).astype(np.int64)
    np.clip(bins, 0, n_bins - 1, out=bins)
    return bins, n_bins


def project_mass_map(m: MassMap2D, axis: ProjectionAxis) -> DiscreteDistribution1D:
    """Project a mass map onto a planar axis and bin the weights.

    For axis-aligned axes with bin_width 1 this is the exact column or row
    marginal of the map.
    """
    if axis.depth:
        raise ContractViolationError("projection onto the depth axis needs a depth map")
    _require_evidence(m, "mass map")
    bins, n_bins = _projection_bins(m, axis)
    raw = np.bincount(bins.ravel(), weights=m.weights.ravel(), minlength=n_bins)
    return DiscreteDistribution1D(0, raw)


def pos_projected(a: MassMap2D, b: MassMap2D, axis: ProjectionAxis) -> float:
    """Superiority of `a` over `b` along a projection axis.

    Both maps must share dimensions so their projections land on one bin
    grid and indices are comparable.
    """
    _require_same_dims(a, b)
    return pos_discrete(project_mass_map(a, axis), project_mass_map(b, axis))


def pos_distance_omni(
    a: MassMap2D, b: MassMap2D, c: float, bin_width: float = 1.0
) -> float:
    """Sum of strict distance-superiority over the four principal directions.

    Lies in [0, 4]; callers use it as a far reward or negate it for close.
    """
    _require_same_dims(a, b)
    x_axis = ProjectionAxis(1.0, 0.0, bin_width)
    y_axis = ProjectionAxis(0.0, 1.0, bin_width)
    ax, bx = project_mass_map(a, x_axis), project_mass_map(b, x_axis)
    ay, by = project_mass_map(a, y_axis), project_mass_map(b, y_axis)
    right = pos_distance(ax, bx, c, bin_width)
    left = pos_distance(bx, ax, c, bin_width)
    bottom = pos_distance(ay, by, c, bin_width)
    top = pos_distance(by, ay, c, bin_width)
    return right + left + top + bottom


# ---------------------------------------------------------------------------
# Relation scoring


# Which projection grows with each planar kind: along +x for right, along
# +y (downward rows) for below; left/above are the swapped-operand reads.
_X_KINDS = (RelationKind.LEFT, RelationKind.RIGHT)
_FORWARD_IS_SUBJECT = {
    RelationKind.RIGHT: True,
    RelationKind.LEFT: False,
    RelationKind.BELOW: True,
    RelationKind.ABOVE: False,
    RelationKind.BEHIND: True,
    RelationKind.IN_FRONT: False,
}


def directional_pos(
    a: MassMap2D, b: MassMap2D, kind: RelationKind, bin_width: float = 1.0
) -> tuple[float, float]:
    """Forward and backward superiority of `a` vs `b` for one planar kind.

    Forward is the superiority along the kind's canonical axis; backward is
    the same statistic with the operands swapped, which equals projecting
    onto the negated axis.
    """
    if not kind.is_planar:
        raise ContractViolationError(f"{kind.value} needs a depth map; use the 3D path")
    _require_same_dims(a, b)
    axis = (
        ProjectionAxis(1.0, 0.0, bin_width)
        if kind in _X_KINDS
        else ProjectionAxis(0.0, 1.0, bin_width)
    )
    pa = project_mass_map(a, axis)
    pb = project_mass_map(b, axis)
    p_sub = pos_discrete(pa, pb)
    p_obj = pos_discrete(pb, pa)
    if _FORWARD_IS_SUBJECT[kind]:
        return p_sub, p_obj
    return p_obj, p_sub


def _combine_scores(scores: list[float], combine: str) -> float:
    if combine == "mean":
        return sum(scores) / len(scores)
    if combine == "min":
        return min(scores)
    raise ContractViolationError(f"unknown combine mode {combine!r}")


def pse(
    a: MassMap2D,
    b: MassMap2D,
    relation: RelationSpec,
    bin_width: float = 1.0,
    combine: str = "mean",
) -> float:
    """Score of a planar relation: clamped forward-minus-backward superiority.

    Composite relations score each component and combine them (mean by
    default, min for the stricter reading).
    """
    if not relation.is_planar:
        raise ContractViolationError("use pse_3d for depth relations")
    _require_same_dims(a, b)
    _require_evidence(a, "subject map")
    _require_evidence(b, "object map")
    scores = []
    for kind in relation.kinds:
        forward, backward = directional_pos(a, b, kind, bin_width)
        scores.append(max(forward - backward, 0.0))
    return _combine_scores(scores, combine)


def pse_binary(score: float, threshold: float = THRESHOLD_DEFAULT) -> bool:
    """Threshold a relation score; the boundary counts as present."""
    if not 0.0 <= score <= 1.0:
        raise ContractViolationError(f"score {score} outside [0, 1]")
    if not 0.0 <= threshold <= 1.0:
        raise ContractViolationError(f"threshold {threshold} outside [0, 1]")
    return score >= threshold


# ---------------------------------------------------------------------------
# Depth relations


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Per-pixel relative depth, either as depth (larger = farther) or
    disparity (larger = closer)."""

    width: int
    height: int
    values: np.ndarray
    convention: str = "depth"

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ContractViolationError("width and height must be positive")
        if self.convention not in ("depth", "disparity"):
            raise ContractViolationError(f"unknown depth convention {self.convention!r}")
        arr = np.array(self.values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ContractViolationError("depth values must be finite")
        if arr.size != self.width * self.height:
            raise ContractViolationError(
                f"values length {arr.size} != width*height {self.width * self.height}"
            )
        arr = np.ascontiguousarray(arr.reshape(self.height, self.width))
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def depth_distribution(
    mask: MassMap2D, depth: DepthMap, bins: int = DEPTH_BINS_DEFAULT
) -> DiscreteDistribution1D:
    """Mask weights accumulated over quantized depth levels.

    Depth is min-max normalized over the whole map and split into
    equal-width bins; disparity maps are flipped first so larger bin index
    always means farther. A constant map collapses to bin 0 (documented
    degenerate case, not an error).
    """
    if bins < 2:
        raise ContractViolationError("bins must be at least 2")
    _require_same_dims(mask, depth)
    _require_evidence(mask, "mask")
    v = depth.values
    v_min = float(v.min())
    v_max = float(v.max())
    if v_max == v_min:
        idx = np.zeros(v.shape, dtype=np.int64)
    else:
        norm = (v - v_min) / (v_max - v_min)
        if depth.convention == "disparity":
            norm = 1.0 - norm
        idx = np.minimum((norm * bins).astype(np.int64), bins - 1)
    raw = np.bincount(idx.ravel(), weights=mask.weights.ravel(), minlength=bins)
    return DiscreteDistribution1D(0, raw)


def directional_pos_3d(
    a: MassMap2D,
    b: MassMap2D,
    depth: DepthMap,
    kind: RelationKind,
    bins: int = DEPTH_BINS_DEFAULT,
) -> tuple[float, float]:
    """Forward and backward superiority along the depth axis."""
    if kind.is_planar:
        raise ContractViolationError(f"{kind.value} is planar; use directional_pos")
    da = depth_distribution(a, depth, bins)
    db = depth_distribution(b, depth, bins)
    p_sub = pos_discrete(da, db)
    p_obj = pos_discrete(db, da)
    if _FORWARD_IS_SUBJECT[kind]:
        return p_sub, p_obj
    return p_obj, p_sub


def pse_3d(
    a: MassMap2D,
    b: MassMap2D,
    depth: DepthMap,
    relation: RelationSpec,
    bins: int = DEPTH_BINS_DEFAULT,
) -> float:
    """Score of an in-front/behind relation via quantized depth."""
    if relation.is_planar or relation.is_composite:
        raise ContractViolationError("pse_3d handles a single in_front or behind kind")
    _require_same_dims(a, b)
    _require_evidence(a, "subject map")
    _require_evidence(b, "object map")
    forward, backward = directional_pos_3d(a, b, depth, relation.kinds[0], bins)
    return max(forward - backward, 0.0)
