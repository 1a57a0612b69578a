"""File ingestion, pair evaluation, the center baseline, and corruptions."""

import json

import numpy as np
import pytest

import posrel as pr
from posrel.errors import (
    ContractViolationError,
    DimensionMismatchError,
    EmptyMapError,
    MalformedFileError,
    MissingDepthError,
    UnsupportedFormatError,
)
from posrel.fileio import read_pfm, write_csv_grid, write_pfm, write_pgm
from posrel.pipeline import (
    iter_manifest,
    record_to_json_line,
    run_batch,
)

from conftest import (
    SCENE_SPANNING_VARIANTS,
    oracle_pse,
    random_mask,
    rect_mask,
    scene_spanning_pair,
    stability_mean_delta,
)


RIGHT = pr.RelationSpec.single("a", "b", pr.RelationKind.RIGHT)


class TestMaskIO:
    def test_pgm_right_column(self, tmp_path):
        path = tmp_path / "m.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 0, 255]))
        mask = pr.load_mask(path)
        assert np.array_equal(mask.weights, [[0, 1], [0, 1]])

    def test_pgm_all_zero_loads(self, tmp_path):
        path = tmp_path / "z.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes(4))
        mask = pr.load_mask(path)
        assert mask.is_empty

    def test_pgm_comment_in_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 0]))
        mask = pr.load_mask(path)
        assert np.array_equal(mask.weights, [[1, 0]])

    def test_csv_right_column(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,1\n0,1\n")
        mask = pr.load_mask(path)
        assert np.array_equal(mask.weights, [[0, 1], [0, 1]])

    def test_pgm_round_trip(self, tmp_path, rng):
        mask = random_mask(rng, 13, 9)
        path = tmp_path / "rt.pgm"
        write_pgm(path, mask.weights)
        assert np.array_equal(pr.load_mask(path).weights, mask.weights)

    def test_malformed_magic(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
        with pytest.raises(MalformedFileError):
            pr.load_mask(path)

    def test_truncated_pixels(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(MalformedFileError, match="pixel bytes"):
            pr.load_mask(path)

    def test_unsupported_extension(self, tmp_path):
        path = tmp_path / "m.png"
        path.write_bytes(b"\x89PNG....")
        with pytest.raises(UnsupportedFormatError):
            pr.load_mask(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            pr.load_mask(tmp_path / "nope.pgm")


class TestDepthIO:
    def test_pfm_values(self, tmp_path):
        path = tmp_path / "d.pfm"
        write_pfm(path, np.array([[0.1, 0.9]]))
        depth = pr.load_depth(path)
        assert depth.values == pytest.approx(np.array([[0.1, 0.9]]), abs=1e-7)

    def test_pfm_row_order_round_trip(self, tmp_path):
        grid = np.arange(12, dtype=float).reshape(3, 4)
        path = tmp_path / "d.pfm"
        write_pfm(path, grid)
        assert np.array_equal(read_pfm(path), grid)

    def test_pfm_big_endian_scale(self, tmp_path):
        values = np.array([[1.5, -2.25]], dtype=">f4")
        path = tmp_path / "be.pfm"
        path.write_bytes(b"Pf\n2 1\n1.0\n" + values.tobytes())
        assert np.array_equal(read_pfm(path), [[1.5, -2.25]])

    def test_pfm_nan_names_pixel(self, tmp_path):
        grid = np.zeros((2, 3), dtype=np.float32)
        grid[1, 2] = np.nan
        path = tmp_path / "nan.pfm"
        path.write_bytes(b"Pf\n3 2\n-1.0\n" + grid[::-1].tobytes())
        with pytest.raises(MalformedFileError, match=r"\(2, 1\)"):
            read_pfm(path)

    def test_csv_depth_with_convention(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("0.5,0.5\n")
        depth = pr.load_depth(path, convention="disparity")
        assert depth.convention == "disparity"

    def test_color_pfm_rejected(self, tmp_path):
        path = tmp_path / "c.pfm"
        path.write_bytes(b"PF\n1 1\n-1.0\n" + bytes(12))
        with pytest.raises(UnsupportedFormatError):
            read_pfm(path)

    def test_attention_round_trip(self, tmp_path, rng):
        grid = rng.uniform(0.0, 2.0, (5, 4))
        path = tmp_path / "a.pfm"
        write_pfm(path, grid)
        loaded = pr.load_attention(path)
        assert loaded.weights == pytest.approx(grid, abs=1e-6)


class TestEvaluatePair:
    def test_disjoint_right(self):
        a = rect_mask(10, 4, 6, 0, 3, 4)
        b = rect_mask(10, 4, 0, 0, 3, 4)
        record = pr.evaluate_pair(a, b, RIGHT)
        assert record.pse == 1.0
        assert record.present_a and record.present_b
        assert record.center_verdict is True
        assert record.pos_forward == 1.0
        assert record.pos_backward == 0.0

    def test_empty_mask_flags(self):
        a = pr.MassMap2D.from_array(np.zeros((4, 4)))
        b = rect_mask(4, 4, 0, 0, 2, 2)
        record = pr.evaluate_pair(a, b, RIGHT)
        assert record.pse == 0.0
        assert record.present_a is False
        assert record.present_b is True
        assert record.center_verdict is None

    def test_record_invariant_pse_from_directions(self, rng):
        for _ in range(20):
            a = random_mask(rng, 9, 9)
            b = random_mask(rng, 9, 9)
            record = pr.evaluate_pair(a, b, RIGHT)
            assert record.pse == max(record.pos_forward - record.pos_backward, 0.0)

    def test_missing_depth_rejected(self):
        a = rect_mask(4, 4, 0, 0, 2, 2)
        rel = pr.RelationSpec.single("a", "b", pr.RelationKind.IN_FRONT)
        with pytest.raises(MissingDepthError):
            pr.evaluate_pair(a, a, rel)

    def test_depth_relation(self):
        a = pr.MassMap2D.from_array([[1, 0], [1, 0]])
        b = pr.MassMap2D.from_array([[0, 1], [0, 1]])
        depth = pr.DepthMap(2, 2, np.array([[0.1, 0.9], [0.1, 0.9]]))
        rel = pr.RelationSpec.single("a", "b", pr.RelationKind.IN_FRONT)
        record = pr.evaluate_pair(a, b, rel, depth)
        assert record.pse == 1.0
        assert record.center_verdict is None

    def test_dimension_mismatch(self):
        a = rect_mask(4, 4, 0, 0, 2, 2)
        b = rect_mask(5, 4, 0, 0, 2, 2)
        with pytest.raises(DimensionMismatchError):
            pr.evaluate_pair(a, b, RIGHT)

    def test_deterministic(self, rng):
        a = random_mask(rng, 12, 12)
        b = random_mask(rng, 12, 12)
        r1 = pr.evaluate_pair(a, b, RIGHT)
        r2 = pr.evaluate_pair(a, b, RIGHT)
        assert record_to_json_line(r1) == record_to_json_line(r2)


class TestCenterBaseline:
    def test_clear_separation(self):
        a = rect_mask(40, 10, 25, 0, 10, 10)  # box center x = 29.5
        b = rect_mask(40, 10, 5, 0, 10, 10)   # box center x = 9.5
        assert pr.center_baseline(a, b, RIGHT) is True

    def test_equal_centers_strict(self):
        a = rect_mask(10, 10, 4, 0, 2, 2)
        b = rect_mask(10, 10, 4, 6, 2, 2)
        assert pr.center_baseline(a, b, RIGHT) is False

    def test_empty_mask_rejected(self):
        a = pr.MassMap2D.from_array(np.zeros((4, 4)))
        b = rect_mask(4, 4, 0, 0, 2, 2)
        with pytest.raises(EmptyMapError):
            pr.center_baseline(a, b, RIGHT)

    def test_depth_relation_rejected(self):
        a = rect_mask(4, 4, 0, 0, 2, 2)
        rel = pr.RelationSpec.single("a", "b", pr.RelationKind.BEHIND)
        with pytest.raises(ContractViolationError):
            pr.center_baseline(a, a, rel)

    def test_agrees_with_score_on_separated_pairs(self, rng):
        for _ in range(20):
            gap = int(rng.integers(1, 5))
            bw = int(rng.integers(2, 5))
            b = rect_mask(24, 8, 2, 2, bw, 4)
            a = rect_mask(24, 8, 2 + bw + gap, 2, 3, 4)
            assert pr.center_baseline(a, b, RIGHT) is True
            assert pr.pse(a, b, RIGHT) == 1.0

    @pytest.mark.parametrize("variant", SCENE_SPANNING_VARIANTS)
    def test_scene_spanning_divergence(self, variant):
        dog, tree = scene_spanning_pair(*variant)
        assert pr.center_baseline(dog, tree, RIGHT) is True
        engine = pr.pse(dog, tree, RIGHT)
        assert engine == pytest.approx(oracle_pse(dog, tree, pr.RelationKind.RIGHT), abs=1e-12)
        assert engine < 0.25

    def test_scene_spanning_record(self):
        dog, tree = scene_spanning_pair(*SCENE_SPANNING_VARIANTS[0])
        record = pr.evaluate_pair(dog, tree, RIGHT)
        assert record.center_verdict is True
        assert record.pse < 0.25


class TestCorruptMask:
    def test_dropout_zero_is_identity(self, rng):
        mask = random_mask(rng, 10, 10)
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("dropout", 0.0, seed=1))
        assert np.array_equal(out.weights, mask.weights)

    def test_dropout_half_exact_count_subset(self):
        mask = rect_mask(20, 10, 0, 0, 10, 10)  # 100 member pixels
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("dropout", 0.5, seed=3))
        assert out.total_weight == 50.0
        assert np.all(mask.weights - out.weights >= 0.0)  # subset

    def test_dropout_is_subset_generally(self, rng):
        mask = random_mask(rng, 16, 16)
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("dropout", 0.3, seed=8))
        assert np.all(out.weights <= mask.weights)

    def test_jitter_preserves_cardinality_in_frame(self):
        mask = rect_mask(30, 30, 10, 10, 5, 5)
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("jitter", 3, seed=5))
        assert out.total_weight == mask.total_weight

    def test_jitter_clips_at_frame(self):
        mask = rect_mask(6, 6, 0, 0, 3, 3)
        outs = {
            pr.corrupt_mask(mask, pr.CorruptionSpec("jitter", 4, seed=s)).total_weight
            for s in range(20)
        }
        assert min(outs) < mask.total_weight  # some offsets push pixels out

    def test_opening_identity_on_solid_rectangle(self):
        mask = rect_mask(20, 20, 4, 4, 10, 10)
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("opening", 1, seed=0))
        assert np.array_equal(out.weights, mask.weights)

    def test_opening_removes_thin_structure(self):
        grid = np.zeros((10, 10))
        grid[5, :] = 1.0  # 1-px line cannot survive 3x3 erosion
        mask = pr.MassMap2D.from_array(grid)
        out = pr.corrupt_mask(mask, pr.CorruptionSpec("opening", 1, seed=0))
        assert out.total_weight == 0.0

    def test_param_domain_checked(self):
        with pytest.raises(ContractViolationError):
            pr.CorruptionSpec("dropout", 1.5)
        with pytest.raises(ContractViolationError):
            pr.CorruptionSpec("opening", 1.5)
        with pytest.raises(ContractViolationError):
            pr.CorruptionSpec("smear", 1.0)

    def test_non_binary_mask_rejected(self):
        mask = pr.MassMap2D.from_array([[0.5, 1.0]])
        with pytest.raises(ContractViolationError):
            pr.corrupt_mask(mask, pr.CorruptionSpec("dropout", 0.1))

    def test_seeded_reproducibility(self, rng):
        mask = random_mask(rng, 20, 20)
        spec = pr.CorruptionSpec("dropout", 0.4, seed=11)
        out1 = pr.corrupt_mask(mask, spec)
        out2 = pr.corrupt_mask(mask, spec)
        assert np.array_equal(out1.weights, out2.weights)


class TestStability:
    def test_dropout_stability(self):
        assert stability_mean_delta("dropout", 0.1) < 0.02

    def test_jitter_stability(self):
        assert stability_mean_delta("jitter", 5) < 0.05

    def test_opening_stability(self):
        assert stability_mean_delta("opening", 1) < 0.02


class TestManifest:
    def _write_fixture(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", rect_mask(10, 4, 6, 0, 3, 4).weights)
        write_pgm(tmp_path / "b.pgm", rect_mask(10, 4, 0, 0, 3, 4).weights)
        write_csv_grid(tmp_path / "d.csv", np.tile(np.linspace(0.1, 0.9, 10), (4, 1)))
        lines = [
            {
                "prompt_id": "p0",
                "candidate_id": "c0",
                "seed": 1,
                "mask_a": "a.pgm",
                "mask_b": "b.pgm",
                "relation": {"subject": "dog", "object": "cat", "kind": "right"},
            },
            {
                "prompt_id": "p0",
                "candidate_id": "c1",
                "mask_a": "b.pgm",
                "mask_b": "a.pgm",
                "relation": {"subject": "dog", "object": "cat", "kind": "right"},
            },
            {
                "prompt_id": "p1",
                "candidate_id": "c0",
                "mask_a": "b.pgm",
                "mask_b": "a.pgm",
                "depth": "d.csv",
                "relation": {"subject": "dog", "object": "cat", "kind": "in_front"},
            },
        ]
        manifest = tmp_path / "manifest.jsonl"
        manifest.write_text("".join(json.dumps(l) + "\n" for l in lines))
        return manifest

    def test_batch_order_and_values(self, tmp_path):
        manifest = self._write_fixture(tmp_path)
        records = run_batch(iter_manifest(manifest))
        assert [r.candidate_id for r in records] == ["c0", "c1", "c0"]
        assert records[0].pse == 1.0
        assert records[1].pse == 0.0
        assert records[2].pse == 1.0  # mask b sits at the near columns

    def test_parallelism_matches_serial(self, tmp_path):
        manifest = self._write_fixture(tmp_path)
        serial = [record_to_json_line(r) for r in run_batch(iter_manifest(manifest), parallelism=1)]
        parallel = [
            record_to_json_line(r) for r in run_batch(iter_manifest(manifest), parallelism=4)
        ]
        assert serial == parallel

    def test_bad_manifest_line_named(self, tmp_path):
        manifest = tmp_path / "m.jsonl"
        manifest.write_text('{"prompt_id": "p"}\n')
        with pytest.raises(MalformedFileError, match="line 1"):
            list(iter_manifest(manifest))

    def test_record_json_round_trip(self, rng):
        a = random_mask(rng, 8, 8)
        b = random_mask(rng, 8, 8)
        record = pr.evaluate_pair(a, b, RIGHT, prompt_id="p", candidate_id="c", seed=4)
        line = record_to_json_line(record)
        back = pr.ScoreRecord.from_json_dict(json.loads(line))
        assert back.prompt_id == record.prompt_id
        assert back.relation == record.relation
        assert back.pse == pytest.approx(record.pse, abs=1e-9)
