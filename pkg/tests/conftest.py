"""Shared fixtures: brute-force oracles and mask builders.

The oracles here recompute the superiority statistics by direct
enumeration (exact fsum over all index pairs, literal negated-axis
projections) so the engine's vectorized paths are checked against an
independent route.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

import posrel as pr


# ---------------------------------------------------------------------------
# Oracles


def brute_pos(a: pr.DiscreteDistribution1D, b: pr.DiscreteDistribution1D) -> float:
    """Double sum of P_a(i) * P_b(j) over i >= j, exactly rounded."""
    terms = []
    for j in range(len(b)):
        for i in range(len(a)):
            if a.start + i >= b.start + j:
                terms.append(float(a.masses[i]) * float(b.masses[j]))
    return math.fsum(terms)


def brute_pos_strict(a, b) -> float:
    terms = []
    for j in range(len(b)):
        for i in range(len(a)):
            if a.start + i > b.start + j:
                terms.append(float(a.masses[i]) * float(b.masses[j]))
    return math.fsum(terms)


def brute_tie(a, b) -> float:
    terms = []
    for j in range(len(b)):
        for i in range(len(a)):
            if a.start + i == b.start + j:
                terms.append(float(a.masses[i]) * float(b.masses[j]))
    return math.fsum(terms)


def brute_pos_half(a, b) -> float:
    """Half-tie convention: P(X > Y) + 0.5 * P(X = Y)."""
    return brute_pos_strict(a, b) + 0.5 * brute_tie(a, b)


def oracle_projection(mask: pr.MassMap2D, vx: float, vy: float) -> pr.DiscreteDistribution1D:
    """Literal projection: t = x*vx + y*vy, binned at floor(t - t_min)."""
    w = mask.weights
    sums: dict[int, float] = {}
    ts = [x * vx + y * vy for y in range(mask.height) for x in range(mask.width)]
    t_min = min(ts)
    for y in range(mask.height):
        for x in range(mask.width):
            if w[y, x] > 0:
                b = math.floor(x * vx + y * vy - t_min + 1e-9)
                sums[b] = sums.get(b, 0.0) + float(w[y, x])
    lo, hi = min(sums), max(sums)
    masses = np.zeros(hi - lo + 1)
    for b, v in sums.items():
        masses[b - lo] = v
    return pr.DiscreteDistribution1D(lo, masses)


_ORACLE_AXES = {
    pr.RelationKind.RIGHT: (1.0, 0.0),
    pr.RelationKind.LEFT: (-1.0, 0.0),
    pr.RelationKind.BELOW: (0.0, 1.0),
    pr.RelationKind.ABOVE: (0.0, -1.0),
}


def oracle_pse(mask_a: pr.MassMap2D, mask_b: pr.MassMap2D, kind: pr.RelationKind) -> float:
    """Clamped forward-minus-backward superiority via literal +/- axis projections."""
    vx, vy = _ORACLE_AXES[kind]
    forward = brute_pos(oracle_projection(mask_a, vx, vy), oracle_projection(mask_b, vx, vy))
    backward = brute_pos(
        oracle_projection(mask_a, -vx, -vy), oracle_projection(mask_b, -vx, -vy)
    )
    return max(forward - backward, 0.0)


def fd_gradients(
    a: pr.MassMap2D, b: pr.MassMap2D, axis: pr.ProjectionAxis, eps: float = 1e-6
) -> tuple[np.ndarray, np.ndarray]:
    """Central finite differences of the guidance loss over every raw weight."""

    def loss_of(wa: np.ndarray, wb: np.ndarray) -> float:
        return pr.pos_loss_grad(
            pr.MassMap2D.from_array(wa), pr.MassMap2D.from_array(wb), axis
        ).loss

    wa = np.array(a.weights)
    wb = np.array(b.weights)
    grads = []
    for which, w in (("a", wa), ("b", wb)):
        grad = np.zeros_like(w)
        for y in range(w.shape[0]):
            for x in range(w.shape[1]):
                plus = w.copy()
                minus = w.copy()
                plus[y, x] += eps
                minus[y, x] -= eps
                if which == "a":
                    grad[y, x] = (loss_of(plus, wb) - loss_of(minus, wb)) / (2 * eps)
                else:
                    grad[y, x] = (loss_of(wa, plus) - loss_of(wa, minus)) / (2 * eps)
        grads.append(grad)
    return grads[0], grads[1]


def max_rel_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    scale = max(float(np.abs(analytic).max()), float(np.abs(reference).max()), 1e-12)
    return float(np.abs(analytic - reference).max()) / scale


# ---------------------------------------------------------------------------
# Builders


def random_distribution(rng: np.random.Generator, max_support: int = 32) -> pr.DiscreteDistribution1D:
    size = int(rng.integers(1, max_support + 1))
    start = int(rng.integers(-10, 11))
    masses = rng.uniform(0.0, 1.0, size)
    masses[rng.random(size) < 0.2] = 0.0
    if masses.sum() == 0.0:
        masses[int(rng.integers(0, size))] = 1.0
    return pr.DiscreteDistribution1D(start, masses)


def rect_mask(width: int, height: int, x0: int, y0: int, w: int, h: int) -> pr.MassMap2D:
    grid = np.zeros((height, width))
    grid[y0 : y0 + h, x0 : x0 + w] = 1.0
    return pr.MassMap2D.from_array(grid)


def random_mask(rng: np.random.Generator, width: int, height: int) -> pr.MassMap2D:
    grid = np.zeros((height, width))
    for _ in range(int(rng.integers(1, 4))):
        w = int(rng.integers(1, max(2, width // 2)))
        h = int(rng.integers(1, max(2, height // 2)))
        x0 = int(rng.integers(0, width - w + 1))
        y0 = int(rng.integers(0, height - h + 1))
        grid[y0 : y0 + h, x0 : x0 + w] = 1.0
    return pr.MassMap2D.from_array(grid)


# (width, height, left column height, right column height, dog x0, dog width)
SCENE_SPANNING_VARIANTS = [
    (100, 60, 26, 22, 46, 12),
    (100, 60, 28, 20, 47, 10),
    (120, 70, 30, 26, 55, 12),
    (120, 70, 34, 24, 56, 11),
    (80, 50, 22, 18, 37, 9),
    (160, 90, 36, 30, 75, 16),
    (100, 60, 24, 21, 47, 11),
    (140, 80, 30, 25, 65, 14),
    (110, 64, 27, 22, 52, 11),
    (90, 56, 24, 20, 42, 10),
]


def scene_spanning_pair(
    width: int, height: int, left_h: int, right_h: int, dog_x0: int, dog_w: int
) -> tuple[pr.MassMap2D, pr.MassMap2D]:
    """A compact mask centered just right of a scene-spanning, left-heavy one.

    The box-center baseline calls the compact object "right of" the
    spanning one even though most of the spanning object's mass is not to
    its left; superiority scoring stays low.
    """
    tree = np.zeros((height, width))
    half = width // 2
    tree[:left_h, :half] = 1.0
    tree[:right_h, half:] = 1.0
    dog_h = max(8, height // 4)
    dog_y0 = min(height - dog_h, left_h + 2)
    dog = np.zeros((height, width))
    dog[dog_y0 : dog_y0 + dog_h, dog_x0 : dog_x0 + dog_w] = 1.0
    return pr.MassMap2D.from_array(dog), pr.MassMap2D.from_array(tree)


def stability_pairs(count: int = 100, seed: int = 424242) -> list[tuple[pr.MassMap2D, pr.MassMap2D]]:
    """Synthetic rectangle pairs: mostly separated along x, some overlapping."""
    gen = np.random.default_rng(seed)
    pairs = []
    for i in range(count):
        mw = int(gen.integers(20, 41))
        mh = int(gen.integers(20, 41))
        if i < 80:  # separated along x by more than the jitter radius
            gap = int(gen.integers(6, 31))
            x_b = int(gen.integers(0, 128 - 2 * mw - gap + 1))
            x_a = x_b + mw + gap
        else:  # mild horizontal overlap
            overlap = int(gen.integers(1, 6))
            x_b = int(gen.integers(0, 128 - 2 * mw + overlap + 1))
            x_a = x_b + mw - overlap
        y_a = int(gen.integers(0, 128 - mh))
        y_b = int(gen.integers(0, 128 - mh))
        pairs.append(
            (rect_mask(128, 128, x_a, y_a, mw, mh), rect_mask(128, 128, x_b, y_b, mw, mh))
        )
    return pairs


def stability_mean_delta(kind: str, param: float) -> float:
    """Mean |score shift| over the synthetic pairs under one corruption."""
    relation = pr.RelationSpec.single("a", "b", pr.RelationKind.RIGHT)
    deltas = []
    for i, (a, b) in enumerate(stability_pairs()):
        base = pr.pse(a, b, relation)
        corrupted = pr.corrupt_mask(a, pr.CorruptionSpec(kind, param, seed=1000 + i))
        if corrupted.is_empty:
            continue
        deltas.append(abs(pr.pse(corrupted, b, relation) - base))
    return sum(deltas) / len(deltas)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240809)
