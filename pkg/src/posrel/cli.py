"""Command-line interface: one binary exposing the whole engine.

Everything emits JSON (JSON-lines for record streams) on stdout;
diagnostics go to stderr. Exit status is 0 on success, 1 on input errors,
2 on internal errors. Every flag is mirrored by a POSREL_* environment
variable, and --config accepts a JSON file overriding the defaults;
explicit flags win over the environment, which wins over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import bench, guidance, opse, pipeline
from .errors import PosrelError
from .fileio import load_attention, load_mask, write_float_map, write_csv_grid, write_pgm
from .pipeline import EvalSettings, record_to_json_line
from .relations import RelationSpec, parse_prompt


@dataclass(frozen=True)
class RunConfig:
    """Run-wide knobs; defaults match the owning modules."""

    threshold: float = 0.5
    depth_bins: int = 256
    depth_convention: str = "depth"
    combine: str = "mean"
    bin_width: float = 1.0
    output_path: str | None = None
    parallelism: int = 1

    def eval_settings(self) -> EvalSettings:
        return EvalSettings(
            depth_bins=self.depth_bins,
            depth_convention=self.depth_convention,
            combine=self.combine,
            bin_width=self.bin_width,
        )


_ENV_PREFIX = "POSREL_"
_CONFIG_CASTS = {
    "threshold": float,
    "depth_bins": int,
    "depth_convention": str,
    "combine": str,
    "bin_width": float,
    "output_path": str,
    "parallelism": int,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Bad usage exits 1 (argparse's default would be 2) with the usage text.
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}".rstrip())


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    config_path = getattr(args, "config", None) or os.environ.get(_ENV_PREFIX + "CONFIG")
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"bad --config file {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise _UsageError(f"--config file {config_path} must hold a JSON object")
        for key, value in loaded.items():
            if key not in _CONFIG_CASTS:
                raise _UsageError(f"unknown config key {key!r} in {config_path}")
            values[key] = _CONFIG_CASTS[key](value)
    for key, cast in _CONFIG_CASTS.items():
        env = os.environ.get(_ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = cast(env)
    for field in fields(RunConfig):
        flag_value = getattr(args, field.name, None)
        if flag_value is not None:
            values[field.name] = flag_value
    return RunConfig(**values)


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file overriding defaults")
    parser.add_argument("--threshold", type=float, default=None)
    parser.add_argument("--depth-bins", dest="depth_bins", type=int, default=None)
    parser.add_argument(
        "--depth-convention",
        dest="depth_convention",
        choices=["depth", "disparity"],
        default=None,
    )
    parser.add_argument("--combine", choices=["mean", "min"], default=None)
    parser.add_argument("--bin-width", dest="bin_width", type=float, default=None)
    parser.add_argument("--output", dest="output_path", default=None)
    parser.add_argument("--parallelism", type=int, default=None)


def _open_output(config: RunConfig):
    if config.output_path:
        return open(config.output_path, "w", encoding="utf-8", newline="\n")
    return sys.stdout


def _emit_lines(config: RunConfig, lines: list[str]) -> None:
    out = _open_output(config)
    try:
        for line in lines:
            out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _json9(obj) -> str:
    """Compact JSON with floats stabilized at 9 significant digits."""

    def stabilize(value):
        if isinstance(value, float):
            return float(f"{value:.9g}")
        if isinstance(value, dict):
            return {k: stabilize(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [stabilize(v) for v in value]
        return value

    return json.dumps(stabilize(obj), separators=(",", ":"))


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_score(args, config: RunConfig) -> int:
    raw = args.line
    if raw == "-":
        raw = sys.stdin.read()
        base_dir = Path.cwd()
    elif raw.lstrip().startswith("{"):
        base_dir = Path.cwd()
    else:
        path = Path(raw)
        base_dir = path.parent
        raw = path.read_text(encoding="utf-8")
    entry = pipeline.parse_manifest_line(json.loads(raw), base_dir)
    record = pipeline.evaluate_entry(entry, config.eval_settings())
    _emit_lines(config, [record_to_json_line(record)])
    return 0


def _cmd_batch(args, config: RunConfig) -> int:
    entries = list(pipeline.iter_manifest(args.manifest))
    records = pipeline.run_batch(entries, config.eval_settings(), config.parallelism)
    _emit_lines(config, [record_to_json_line(r) for r in records])
    return 0


def _cmd_grad(args, config: RunConfig) -> int:
    map_a = load_attention(args.map_a)
    map_b = load_attention(args.map_b)
    relation = RelationSpec.from_kind_token("a", "b", args.relation)
    combined = guidance.combined_loss_grad(
        {"a": map_a, "b": map_b}, [relation], config.bin_width
    )
    write_float_map(args.out_a, combined.grads["a"])
    write_float_map(args.out_b, combined.grads["b"])
    _emit_lines(config, [_json9({"loss": combined.loss})])
    return 0


def _cmd_corrupt(args, config: RunConfig) -> int:
    mask = load_mask(args.mask)
    spec = pipeline.CorruptionSpec(kind=args.kind, param=args.param, seed=args.seed)
    corrupted = pipeline.corrupt_mask(mask, spec)
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_csv_grid(out, corrupted.weights.astype(int))
    else:
        write_pgm(out, corrupted.weights)
    return 0


def _cmd_parse(args, config: RunConfig) -> int:
    if args.file:
        prompts = [
            line for line in Path(args.file).read_text(encoding="utf-8").splitlines() if line.strip()
        ]
    elif args.text is not None:
        prompts = [args.text]
    else:
        prompts = [line.rstrip("\n") for line in sys.stdin if line.strip()]
    lines = []
    for prompt in prompts:
        result = parse_prompt(prompt)
        for diag in result.diagnostics:
            print(f"parse: {diag}", file=sys.stderr)
        lines.append(
            _json9(
                {"prompt": prompt, "relations": [r.to_json_dict() for r in result.relations]}
            )
        )
    _emit_lines(config, lines)
    return 0


def _cmd_metrics(args, config: RunConfig) -> int:
    records = pipeline.read_records(args.records)
    report = bench.aggregate(records, config.threshold)
    if args.format == "table":
        visor = " ".join("-" if v is None else f"{v:.4f}" for v in report.visor)
        rows = [
            ("mean_pse", f"{report.mean_pse:.6f}"),
            ("mean_pse_conditional", f"{report.mean_pse_conditional:.6f}"),
            ("object_accuracy", f"{report.object_accuracy:.6f}"),
            ("visor_1..4", visor),
            ("count", str(report.count)),
        ]
        width = max(len(name) for name, _ in rows)
        _emit_lines(config, [f"{name:<{width}}  {value}" for name, value in rows])
    else:
        _emit_lines(config, [_json9(report.to_dict())])
    return 0


def _cmd_best_of_n(args, config: RunConfig) -> int:
    records = pipeline.read_records(args.records)
    selected = bench.best_of_n(records)
    _emit_lines(config, [record_to_json_line(r) for r in selected.values()])
    return 0


def _cmd_opse_sim(args, config: RunConfig) -> int:
    means = [float(v) for v in args.means.split(",") if v.strip()]
    results = [
        opse.simulate(means, args.rounds, args.alpha, seed, args.reward_model)
        for seed in range(args.seeds)
    ]
    counts = [r.pull_counts for r in results]
    best = int(np.argmax(means))
    plurality = sum(
        1 for c in counts if all(c[best] > c[i] for i in range(len(means)) if i != best)
    ) / len(counts)
    if args.format == "table":
        header = "seed  " + "  ".join(f"arm{i}" for i in range(len(means)))
        lines = [header]
        for seed, c in enumerate(counts):
            lines.append(f"{seed:<4}  " + "  ".join(f"{v:>4}" for v in c))
        lines.append(f"best-arm plurality fraction: {plurality:.4f}")
        _emit_lines(config, lines)
    else:
        _emit_lines(
            config,
            [
                _json9(
                    {
                        "means": means,
                        "rounds": args.rounds,
                        "alpha": args.alpha,
                        "seeds": args.seeds,
                        "pull_counts": counts,
                        "best_arm_plurality": plurality,
                    }
                )
            ],
        )
    return 0


def _cmd_opse_run(args, config: RunConfig) -> int:
    state = opse.BanditState.fresh(args.arms, args.alpha)
    out = sys.stdout
    out.write(_json9({"t": state.t, "next_arm": opse.select_arm(state)}) + "\n")
    out.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        obj = json.loads(line)
        opse.update(state, int(obj["arm"]), float(obj["score"]))
        out.write(_json9({"t": state.t, "next_arm": opse.select_arm(state)}) + "\n")
        out.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posrel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="evaluate one manifest line")
    p.add_argument("line", help="JSON object, a file holding one, or - for stdin")
    _add_common_options(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("batch", help="evaluate a JSON-lines manifest")
    p.add_argument("manifest")
    _add_common_options(p)
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("grad", help="loss and gradients for two attention maps")
    p.add_argument("--map-a", required=True)
    p.add_argument("--map-b", required=True)
    p.add_argument("--relation", required=True, help="relation kind, e.g. right or top_left")
    p.add_argument("--out-a", required=True, help="gradient output for map A (PFM or CSV)")
    p.add_argument("--out-b", required=True)
    _add_common_options(p)
    p.set_defaults(func=_cmd_grad)

    p = sub.add_parser("corrupt", help="apply a corruption to a binary mask")
    p.add_argument("mask")
    p.add_argument("--kind", required=True, choices=["dropout", "jitter", "opening"])
    p.add_argument("--param", required=True, type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_common_options(p)
    p.set_defaults(func=_cmd_corrupt)

    p = sub.add_parser("parse", help="extract relations from template prompts")
    p.add_argument("text", nargs="?", help="prompt text; omit to read stdin")
    p.add_argument("--file", help="file with one prompt per line")
    _add_common_options(p)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("metrics", help="aggregate a score-record stream")
    p.add_argument("records")
    p.add_argument("--format", choices=["json", "table"], default="json")
    _add_common_options(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("best-of-n", help="select the best candidate per prompt")
    p.add_argument("records")
    _add_common_options(p)
    p.set_defaults(func=_cmd_best_of_n)

    p = sub.add_parser("opse-sim", help="simulate online model selection")
    p.add_argument("--means", required=True, help="comma-separated arm means in [0,1]")
    p.add_argument("--rounds", required=True, type=int)
    p.add_argument("--alpha", type=float, default=opse.ALPHA_DEFAULT)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--reward-model", choices=["bernoulli", "beta"], default="bernoulli")
    p.add_argument("--format", choices=["json", "table"], default="json")
    _add_common_options(p)
    p.set_defaults(func=_cmd_opse_sim)

    p = sub.add_parser("opse-run", help="drive selection from a live {arm, score} stream")
    p.add_argument("--arms", required=True, type=int)
    p.add_argument("--alpha", type=float, default=opse.ALPHA_DEFAULT)
    _add_common_options(p)
    p.set_defaults(func=_cmd_opse_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve_config(args)
        return args.func(args, config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PosrelError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
