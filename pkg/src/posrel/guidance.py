"""Analytic gradients of the superiority loss on raw attention weights.

The loss for one directed relation between two attention maps is the
negated square of the projected superiority statistic computed on their
sum-normalized weights. Because each pixel feeds exactly one projection
bin, the chain rule through binning and normalization has a closed form:
the per-bin partials are the other map's CDF (for the leading map) and the
survival of the leading map (for the trailing one), and normalization
centers them by the statistic itself.

The host pipeline owns the latent update; this module only returns
gradients with respect to the attention-map weights plus the step-scale
schedule to drive them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import MassMap2D, ProjectionAxis, RelationKind, _projection_bins, _require_same_dims
from .errors import ContractViolationError, EmptyMapError, UnknownTokenError
from .relations import RelationSpec


@dataclass(frozen=True)
class GuidanceConfig:
    """Step-scale schedule: initial factor, guided step count, decay law."""

    scale_0: float
    steps: int
    schedule: str = "constant"

    def __post_init__(self) -> None:
        if self.scale_0 <= 0:
            raise ContractViolationError("scale_0 must be positive")
        if self.steps < 1:
            raise ContractViolationError("steps must be at least 1")
        if self.schedule not in ("constant", "linear_decay"):
            raise ContractViolationError(f"unknown schedule {self.schedule!r}")


# Defaults that work well on large and small denoiser backbones.
LARGE_BACKBONE_DEFAULT = GuidanceConfig(scale_0=1000.0, steps=10)
SMALL_BACKBONE_DEFAULT = GuidanceConfig(scale_0=20.0, steps=25)


def step_scale(t: int, config: GuidanceConfig) -> float:
    """Step factor at denoising step t; zero outside the guided window."""
    if t < 0:
        raise ContractViolationError("step index must be nonnegative")
    if t >= config.steps:
        return 0.0
    if config.schedule == "linear_decay":
        return config.scale_0 * (1.0 - t / config.steps)
    return config.scale_0


@dataclass(frozen=True, eq=False)
class GradientResult:
    """Loss value and the raw-weight gradients for both maps."""

    loss: float
    grad_a: np.ndarray
    grad_b: np.ndarray


def _loss_and_pixel_grads(
    a: MassMap2D, b: MassMap2D, axis: ProjectionAxis
) -> tuple[float, np.ndarray, np.ndarray]:
    _require_same_dims(a, b)
    if axis.depth:
        raise ContractViolationError("guidance gradients are planar; depth has no attention axis")
    if a.is_empty:
        raise EmptyMapError("map a has zero total weight")
    if b.is_empty:
        raise EmptyMapError("map b has zero total weight")
    bins, n_bins = _projection_bins(a, axis)
    flat_bins = bins.ravel()
    u_a = np.bincount(flat_bins, weights=a.weights.ravel(), minlength=n_bins)
    u_b = np.bincount(flat_bins, weights=b.weights.ravel(), minlength=n_bins)
    s_a = float(u_a.sum())
    s_b = float(u_b.sum())
    p_a = u_a / s_a
    p_b = u_b / s_b
    cdf_b = np.cumsum(p_b)
    surv_a = np.cumsum(p_a[::-1])[::-1]
    p = float(np.dot(p_a, cdf_b))
    # d p / d raw weight, per pixel: per-bin partial centered by p, over the total.
    dp_da = (cdf_b[bins] - p) / s_a
    dp_db = (surv_a[bins] - p) / s_b
    scale = -2.0 * p
    return -(p * p), scale * dp_da, scale * dp_db


def pos_loss_grad(a_raw: MassMap2D, b_raw: MassMap2D, axis: ProjectionAxis) -> GradientResult:
    """Loss and gradients of the squared-superiority objective.

    The loss is minimized (toward -1) when the first map's projection sits
    entirely beyond the second's along the axis. Once the projections are
    fully separated the gradient vanishes at every occupied pixel (no
    force on existing mass: the relation is already satisfied); hosts
    should treat an all-zero gradient as exactly that. Off-support pixels
    can keep a restoring gradient, since mass added beyond the other map
    would re-mix the projections.
    """
    loss, grad_a, grad_b = _loss_and_pixel_grads(a_raw, b_raw, axis)
    return GradientResult(loss=loss, grad_a=grad_a, grad_b=grad_b)


_KIND_AXIS = {
    RelationKind.RIGHT: (1.0, 0.0),
    RelationKind.LEFT: (-1.0, 0.0),
    RelationKind.BELOW: (0.0, 1.0),
    RelationKind.ABOVE: (0.0, -1.0),
}


def axis_for_kind(kind: RelationKind, bin_width: float = 1.0) -> ProjectionAxis:
    """Canonical projection axis of a planar relation kind."""
    if kind not in _KIND_AXIS:
        raise ContractViolationError(f"{kind.value} has no planar guidance axis")
    vx, vy = _KIND_AXIS[kind]
    return ProjectionAxis(vx, vy, bin_width)


@dataclass(eq=False)
class CombinedGradient:
    """Summed loss and per-token gradients over a set of relations."""

    loss: float
    grads: dict[str, np.ndarray]


def combined_loss_grad(
    maps: Mapping[str, MassMap2D],
    relations: Sequence[RelationSpec],
    bin_width: float = 1.0,
) -> CombinedGradient:
    """Accumulate per-relation losses and gradients over token maps.

    Losses add up; gradients accumulate additively per map. Composite
    directions expand into one loss per component axis. An empty relation
    list yields zero loss and zero gradients.
    """
    grads = {token: np.zeros_like(m.weights) for token, m in maps.items()}
    total_loss = 0.0
    for relation in relations:
        missing = [t for t in (relation.subject, relation.object) if t not in maps]
        if missing:
            raise UnknownTokenError(f"relation references unknown token(s): {', '.join(missing)}")
        if not relation.is_planar:
            raise ContractViolationError(
                f"{relation.kind_token} is a depth relation; attention maps are planar"
            )
        a = maps[relation.subject]
        b = maps[relation.object]
        for kind in relation.kinds:
            loss, grad_a, grad_b = _loss_and_pixel_grads(a, b, axis_for_kind(kind, bin_width))
            total_loss += loss
            grads[relation.subject] = grads[relation.subject] + grad_a
            grads[relation.object] = grads[relation.object] + grad_b
    return CombinedGradient(loss=total_loss, grads=grads)
