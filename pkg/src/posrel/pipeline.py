"""Per-pair evaluation, the center-of-box baseline, and mask corruptions.

A manifest line names two mask files, an optional depth map, and one
relation; evaluation produces a ScoreRecord. A missing object never raises
here: it becomes presence flags and a zero score so batch runs stay total.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from scipy import ndimage

from . import core
from .core import DepthMap, MassMap2D
from .errors import (
    ContractViolationError,
    EmptyMapError,
    MalformedFileError,
    MissingDepthError,
)
from .fileio import load_depth, load_mask
from .relations import RelationKind, RelationSpec


@dataclass(frozen=True)
class EvalSettings:
    """Knobs shared by every evaluation in a run."""

    depth_bins: int = core.DEPTH_BINS_DEFAULT
    depth_convention: str = "depth"
    combine: str = "mean"
    bin_width: float = 1.0


@dataclass(frozen=True)
class ScoreRecord:
    """Outcome of scoring one (prompt, candidate, relation) triple."""

    prompt_id: str
    candidate_id: str
    seed: int | None
    relation: RelationSpec
    pse: float
    pos_forward: float
    pos_backward: float
    present_a: bool
    present_b: bool
    center_verdict: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "candidate_id": self.candidate_id,
            "seed": self.seed,
            "relation": self.relation.to_json_dict(),
            "pse": _round9(self.pse),
            "pos_forward": _round9(self.pos_forward),
            "pos_backward": _round9(self.pos_backward),
            "present_a": self.present_a,
            "present_b": self.present_b,
            "center_verdict": self.center_verdict,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ScoreRecord":
        rel = obj["relation"]
        relation = RelationSpec.from_kind_token(
            rel["subject"], rel["object"], rel["kind"], rel.get("c")
        )
        return cls(
            prompt_id=obj["prompt_id"],
            candidate_id=obj["candidate_id"],
            seed=obj.get("seed"),
            relation=relation,
            pse=obj["pse"],
            pos_forward=obj["pos_forward"],
            pos_backward=obj["pos_backward"],
            present_a=obj["present_a"],
            present_b=obj["present_b"],
            center_verdict=obj.get("center_verdict"),
        )


def _round9(x: float) -> float:
    """Stabilize floats at 9 significant digits for byte-identical output."""
    return float(f"{x:.9g}")


def record_to_json_line(record: ScoreRecord) -> str:
    return json.dumps(record.to_json_dict(), separators=(",", ":"))


def read_records(path: str | Path) -> list[ScoreRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(ScoreRecord.from_json_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise MalformedFileError(f"{path}: line {lineno}: bad record: {exc}") from exc
    return records


def center_baseline(mask_a: MassMap2D, mask_b: MassMap2D, relation: RelationSpec) -> bool:
    """Compare bounding-box centers along the relation axis, strictly.

    The baseline that superiority scoring is meant to replace: it ignores
    object shape and extent, so a scene-spanning object can put its box
    center on the "correct" side while most of its mass is not.
    """
    if not relation.is_planar:
        raise ContractViolationError("the center baseline handles planar relations only")
    centers = []
    for name, mask in (("mask_a", mask_a), ("mask_b", mask_b)):
        rows, cols = np.nonzero(mask.weights)
        if rows.size == 0:
            raise EmptyMapError(f"{name} has no member pixels")
        centers.append(
            (
                (float(cols.min()) + float(cols.max())) / 2.0,
                (float(rows.min()) + float(rows.max())) / 2.0,
            )
        )
    (ax, ay), (bx, by) = centers
    checks = {
        RelationKind.RIGHT: ax > bx,
        RelationKind.LEFT: ax < bx,
        RelationKind.BELOW: ay > by,
        RelationKind.ABOVE: ay < by,
    }
    return all(checks[kind] for kind in relation.kinds)


def evaluate_pair(
    mask_a: MassMap2D,
    mask_b: MassMap2D,
    relation: RelationSpec,
    depth: DepthMap | None = None,
    *,
    prompt_id: str = "",
    candidate_id: str = "",
    seed: int | None = None,
    settings: EvalSettings = EvalSettings(),
) -> ScoreRecord:
    """Score one mask pair; emptiness becomes flags, never an exception."""
    core._require_same_dims(mask_a, mask_b)
    if not relation.is_planar and depth is None:
        raise MissingDepthError(f"relation {relation.kind_token} needs a depth map")
    if depth is not None:
        core._require_same_dims(mask_a, depth)

    present_a = not mask_a.is_empty
    present_b = not mask_b.is_empty
    if not (present_a and present_b):
        return ScoreRecord(
            prompt_id, candidate_id, seed, relation, 0.0, 0.0, 0.0, present_a, present_b, None
        )

    if relation.is_planar:
        forwards, backwards, scores = [], [], []
        for kind in relation.kinds:
            f, b = core.directional_pos(mask_a, mask_b, kind, settings.bin_width)
            forwards.append(f)
            backwards.append(b)
            scores.append(max(f - b, 0.0))
        score = core._combine_scores(scores, settings.combine)
        forward = sum(forwards) / len(forwards)
        backward = sum(backwards) / len(backwards)
        verdict = center_baseline(mask_a, mask_b, relation)
    else:
        forward, backward = core.directional_pos_3d(
            mask_a, mask_b, depth, relation.kinds[0], settings.depth_bins
        )
        score = max(forward - backward, 0.0)
        verdict = None
    return ScoreRecord(
        prompt_id,
        candidate_id,
        seed,
        relation,
        score,
        forward,
        backward,
        present_a,
        present_b,
        verdict,
    )


# ---------------------------------------------------------------------------
# Mask corruptions


_CORRUPTION_KINDS = ("dropout", "jitter", "opening")


@dataclass(frozen=True)
class CorruptionSpec:
    """One mask corruption: dropout fraction, jitter radius, or opening count."""

    kind: str
    param: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _CORRUPTION_KINDS:
            raise ContractViolationError(f"unknown corruption kind {self.kind!r}")
        if self.kind == "dropout" and not 0.0 <= self.param <= 1.0:
            raise ContractViolationError("dropout fraction must be in [0, 1]")
        if self.kind == "jitter" and self.param < 0:
            raise ContractViolationError("jitter radius must be nonnegative")
        if self.kind == "opening" and (self.param < 0 or self.param != int(self.param)):
            raise ContractViolationError("opening iterations must be a nonnegative integer")


def corrupt_mask(mask: MassMap2D, spec: CorruptionSpec) -> MassMap2D:
    """Apply a corruption to a binary mask under a seeded generator.

    Dropout removes a deterministic count of member pixels; jitter
    translates the whole mask by a random integer offset, clipping at the
    frame; opening erodes then dilates with a 3x3 kernel the same number
    of times.
    """
    if not mask.is_binary():
        raise ContractViolationError("corruptions are defined on binary masks")
    grid = np.array(mask.weights)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "dropout":
        rows, cols = np.nonzero(grid)
        n_remove = int(spec.param * rows.size)
        if n_remove:
            pick = rng.choice(rows.size, size=n_remove, replace=False)
            grid[rows[pick], cols[pick]] = 0.0
    elif spec.kind == "jitter":
        radius = int(spec.param)
        dx, dy = (int(v) for v in rng.integers(-radius, radius + 1, size=2))
        moved = np.zeros_like(grid)
        h, w = grid.shape
        ys, xs = np.nonzero(grid)
        ys2, xs2 = ys + dy, xs + dx
        keep = (ys2 >= 0) & (ys2 < h) & (xs2 >= 0) & (xs2 < w)
        moved[ys2[keep], xs2[keep]] = 1.0
        grid = moved
    else:  # opening
        iterations = int(spec.param)
        if iterations > 0:
            structure = np.ones((3, 3), dtype=bool)
            eroded = ndimage.binary_erosion(grid > 0, structure, iterations=iterations)
            grid = ndimage.binary_dilation(eroded, structure, iterations=iterations).astype(
                np.float64
            )
    return MassMap2D.from_array(grid)


# ---------------------------------------------------------------------------
# Manifests


@dataclass(frozen=True)
class ManifestEntry:
    prompt_id: str
    candidate_id: str
    seed: int | None
    mask_a: Path
    mask_b: Path
    depth: Path | None
    relation: RelationSpec


def _resolve(base_dir: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base_dir / p


def parse_manifest_line(obj: dict, base_dir: Path, where: str = "manifest") -> ManifestEntry:
    try:
        rel = obj["relation"]
        relation = RelationSpec.from_kind_token(
            rel["subject"], rel["object"], rel["kind"], rel.get("c")
        )
        return ManifestEntry(
            prompt_id=str(obj["prompt_id"]),
            candidate_id=str(obj["candidate_id"]),
            seed=obj.get("seed"),
            mask_a=_resolve(base_dir, obj["mask_a"]),
            mask_b=_resolve(base_dir, obj["mask_b"]),
            depth=_resolve(base_dir, obj["depth"]) if obj.get("depth") else None,
            relation=relation,
        )
    except (KeyError, TypeError, ContractViolationError) as exc:
        raise MalformedFileError(f"{where}: bad manifest entry: {exc}") from exc


def iter_manifest(path: str | Path) -> Iterator[ManifestEntry]:
    path = Path(path)
    base_dir = path.parent
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedFileError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
        yield parse_manifest_line(obj, base_dir, where=f"{path}: line {lineno}")


def evaluate_entry(entry: ManifestEntry, settings: EvalSettings = EvalSettings()) -> ScoreRecord:
    mask_a = load_mask(entry.mask_a)
    mask_b = load_mask(entry.mask_b)
    depth = load_depth(entry.depth, settings.depth_convention) if entry.depth else None
    return evaluate_pair(
        mask_a,
        mask_b,
        entry.relation,
        depth,
        prompt_id=entry.prompt_id,
        candidate_id=entry.candidate_id,
        seed=entry.seed,
        settings=settings,
    )


def run_batch(
    entries: Iterable[ManifestEntry],
    settings: EvalSettings = EvalSettings(),
    parallelism: int = 1,
) -> list[ScoreRecord]:
    """Evaluate entries, preserving input order regardless of parallelism."""
    entries = list(entries)
    if parallelism <= 1 or len(entries) <= 1:
        return [evaluate_entry(e, settings) for e in entries]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda e: evaluate_entry(e, settings), entries))
