"""Command-line surface: source training, streaming adaptation, ablation sweeps,
synthetic data generation, and bank snapshot inspection.

Configuration precedence: command-line flags override config-file values, which
override built-in defaults. The config file is plain `key = value` text. The
VIEWADAPT_OUTPUT_DIR environment variable overrides the resolved output directory.

Exit codes: 0 success, 2 configuration error, 3 input format error, 4 empty
evaluation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .banks import export_bank_snapshot
from .clues import ClassFeatureTable
from .container import read_params, read_records, write_params, write_records
from .core import EngineConfig
from .errors import ConfigError, EmptyEvaluation, FormatError
from .head import AnticipationHead, train_source
from .pipeline import RunResult, Toggles, adapt_stream, sweep_stream, sweep_table
from .synthetic import SyntheticSpec, class_directions, generate_synthetic

OUTPUT_DIR_ENV = "VIEWADAPT_OUTPUT_DIR"

# config-file keys that feed EngineConfig, with their parsers
_CONFIG_FIELDS = {
    "class_count": int,
    "k_labels": int,
    "bank_capacity": int,
    "mu1": float,
    "mu2": float,
    "alpha": float,
    "batch_size": int,
    "learning_rate": float,
    "frames_per_window": int,
    "tau_obs_s": float,
    "tau_interval_s": float,
    "kl_epsilon": float,
}
_RUN_FIELDS = {"top_k": int, "seed": int, "output_dir": str}

# flag destination -> config key (flags use the short operator-facing spellings)
_FLAG_TO_KEY = {
    "k": "k_labels",
    "bank_capacity": "bank_capacity",
    "mu1": "mu1",
    "mu2": "mu2",
    "alpha": "alpha",
    "batch_size": "batch_size",
    "lr": "learning_rate",
    "class_count": "class_count",
    "top_k": "top_k",
    "seed": "seed",
    "output_dir": "output_dir",
}


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    known = set(_CONFIG_FIELDS) | set(_RUN_FIELDS)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key = value")
                key, _, value = line.partition("=")
                key = key.strip()
                value = value.strip()
                if key not in known:
                    raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
                values[key] = value
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return values


def _resolve_settings(args: argparse.Namespace, class_count_hint: int | None = None) -> dict:
    """Merge defaults <- config file <- explicit flags into one settings dict."""
    settings: dict = {"top_k": 5, "seed": 0, "output_dir": "."}
    if class_count_hint is not None:
        settings["class_count"] = class_count_hint
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            cast = _CONFIG_FIELDS.get(key) or _RUN_FIELDS.get(key)
            try:
                settings[key] = cast(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    for dest, key in _FLAG_TO_KEY.items():
        value = getattr(args, dest, None)
        if value is not None:
            settings[key] = value
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        settings["output_dir"] = env_dir
    return settings


def _build_config(settings: dict) -> EngineConfig:
    if "class_count" not in settings:
        raise ConfigError("class_count is required (flag, config file, or head checkpoint)")
    kwargs = {k: settings[k] for k in _CONFIG_FIELDS if k in settings}
    return EngineConfig(**kwargs)


def save_head(path, head: AnticipationHead) -> None:
    write_params(path, head.params())


def load_head(path) -> AnticipationHead:
    params = read_params(path)
    try:
        return AnticipationHead(
            proj_weights=params["proj_weights"],
            proj_bias=params["proj_bias"].ravel(),
            cls_weights=params["cls_weights"],
            cls_bias=params["cls_bias"].ravel(),
        )
    except KeyError as exc:
        raise FormatError(f"head checkpoint is missing parameter {exc}", offset=0) from None


def save_table(path, table: ClassFeatureTable) -> None:
    write_params(path, {"class_features": table.features})


def load_table(path) -> ClassFeatureTable:
    params = read_params(path)
    if "class_features" not in params:
        raise FormatError("table checkpoint is missing 'class_features'", offset=0)
    return ClassFeatureTable.from_embeddings(params["class_features"])


def write_labels_json(path, labels: dict[str, tuple[int, ...]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: list(v) for k, v in labels.items()}, fh, sort_keys=True, indent=0)
        fh.write("\n")


def read_labels_json(path) -> dict[str, tuple[int, ...]]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad labels file: {exc}", offset=exc.pos) from None
    if not isinstance(obj, dict):
        raise FormatError("labels file must map sample ids to label lists", offset=0)
    return {str(k): tuple(int(x) for x in v) for k, v in obj.items()}


@dataclass
class RunManifest:
    """Everything one adapt run depends on; identical manifests give identical artifacts."""

    config: EngineConfig
    head_path: str
    target_path: str
    labels_path: str | None = None
    table_path: str | None = None
    seed: int = 0
    toggles: Toggles = field(default_factory=Toggles)
    output_dir: str = "."
    top_k: int = 5
    setting: str = "full"


def _load_run_inputs(manifest: RunManifest):
    head = load_head(manifest.head_path)
    if head.class_count != manifest.config.class_count:
        raise ConfigError(
            f"head has {head.class_count} classes but the configuration says {manifest.config.class_count}"
        )
    records = read_records(manifest.target_path)
    eval_labels = read_labels_json(manifest.labels_path) if manifest.labels_path else None
    table = None
    if manifest.toggles.needs_table:
        if manifest.table_path:
            table = load_table(manifest.table_path)
        else:
            dim = records[0].dim if records else head.input_dim
            table = ClassFeatureTable.random_unit(manifest.config.class_count, dim, manifest.seed)
    return head, records, eval_labels, table


def run_adapt(manifest: RunManifest) -> RunResult:
    """Load inputs, stream-adapt, and write report.txt/report.csv/banks.jsonl plus
    the adapted table checkpoint into the output directory."""
    head, records, eval_labels, table = _load_run_inputs(manifest)
    result = adapt_stream(
        head,
        table,
        records,
        eval_labels,
        manifest.config,
        toggles=manifest.toggles,
        top_k=manifest.top_k,
        setting=manifest.setting,
    )
    out = manifest.output_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(result.report_text)
    with open(os.path.join(out, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(result.report_csv)
    export_bank_snapshot(result.banks, os.path.join(out, "banks.jsonl"))
    if result.table is not None:
        save_table(os.path.join(out, "table.eefc"), result.table)
    return result


def run_sweep(manifest: RunManifest, axis: str, values: list[float]) -> list[tuple[float, RunResult]]:
    """One adapt run per axis value; writes sweep.csv plus one report per value."""
    head, records, eval_labels, table = _load_run_inputs(manifest)
    results = sweep_stream(
        head,
        table,
        records,
        eval_labels,
        manifest.config,
        axis,
        values,
        toggles=manifest.toggles,
        top_k=manifest.top_k,
    )
    out = manifest.output_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8") as fh:
        fh.write(sweep_table(results, axis))
    for value, result in results:
        name = f"report_{axis}_{value:g}.txt"
        with open(os.path.join(out, name), "w", encoding="utf-8") as fh:
            fh.write(result.report_text)
    return results


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--k", type=int, help="pseudo labels per sample")
    parser.add_argument("--bank-capacity", type=int, dest="bank_capacity")
    parser.add_argument("--mu1", type=float, help="visual clue logit scale")
    parser.add_argument("--mu2", type=float, help="textual clue logit scale")
    parser.add_argument("--alpha", type=float, help="clue branch fusion weight")
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--lr", type=float, help="table learning rate")
    parser.add_argument("--class-count", type=int, dest="class_count")
    parser.add_argument("--top-k", type=int, dest="top_k", help="evaluation recall cutoff")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir", dest="output_dir")


def _add_toggle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-prototypes", action="store_true", help="disable the prototype branch")
    parser.add_argument("--no-visual-clue", action="store_true")
    parser.add_argument("--no-textual-clue", action="store_true")
    parser.add_argument("--no-consistency", action="store_true")
    parser.add_argument("--single-label", action="store_true", help="force one pseudo label per sample")
    parser.add_argument("--no-adaptation", action="store_true", help="frozen-head baseline; disables every branch")


def _toggles_from_args(args: argparse.Namespace) -> Toggles:
    if args.no_adaptation:
        return Toggles(
            use_prototypes=False,
            use_visual_clue=False,
            use_textual_clue=False,
            use_consistency=False,
            multi_label=not args.single_label,
        )
    use_visual = not args.no_visual_clue
    use_textual = not args.no_textual_clue
    return Toggles(
        use_prototypes=not args.no_prototypes,
        use_visual_clue=use_visual,
        use_textual_clue=use_textual,
        use_consistency=not args.no_consistency and use_visual and use_textual,
        multi_label=not args.single_label,
    )


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    head = load_head(args.head)
    settings = _resolve_settings(args, class_count_hint=head.class_count)
    config = _build_config(settings)
    return RunManifest(
        config=config,
        head_path=args.head,
        target_path=args.target,
        labels_path=args.labels,
        table_path=args.table,
        seed=settings["seed"],
        toggles=_toggles_from_args(args),
        output_dir=settings["output_dir"],
        top_k=settings["top_k"],
        setting=args.setting or ("baseline" if args.no_adaptation else "full"),
    )


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    out = settings["output_dir"]
    spec = SyntheticSpec(
        seed=settings["seed"],
        class_count=args.classes,
        dim=args.dim,
        labels_per_sample=args.labels_per_sample,
        view_rotation_angle=args.angle,
        view_noise_sigma=args.sigma,
        samples=args.samples,
        frames=args.frames,
    )
    source, target, eval_labels = generate_synthetic(spec)
    os.makedirs(out, exist_ok=True)
    write_records(os.path.join(out, "source.eefc"), source)
    write_records(os.path.join(out, "target.eefc"), target)
    write_labels_json(os.path.join(out, "eval_labels.json"), eval_labels)
    write_params(os.path.join(out, "class_features.eefc"), {"class_features": class_directions(spec)})
    print(f"wrote {len(source)} source and {len(target)} target records to {out}")
    return 0


def _cmd_train_source(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    records = read_records(args.source)
    if not records:
        raise ConfigError("source container is empty")
    if "class_count" not in settings:
        raise ConfigError("train-source needs --class-count (or a config file entry)")
    head = AnticipationHead.random_init(
        input_dim=records[0].dim,
        internal_dim=args.internal_dim,
        class_count=settings["class_count"],
        seed=settings["seed"],
    )
    train_source(head, records, epochs=args.epochs, lr=args.source_lr)
    out = settings["output_dir"]
    os.makedirs(out, exist_ok=True)
    head_path = os.path.join(out, "head.eefc")
    save_head(head_path, head)
    print(f"trained on {len(records)} records; head written to {head_path}")
    return 0


def _cmd_adapt(args: argparse.Namespace) -> int:
    result = run_adapt(_manifest_from_args(args))
    sys.stdout.write(result.report_text)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --values list: {args.values!r}") from None
    results = run_sweep(_manifest_from_args(args), args.axis, values)
    sys.stdout.write(sweep_table(results, args.axis))
    return 0


def _cmd_inspect_banks(args: argparse.Namespace) -> int:
    per_class: dict[int, list[tuple[float, float]]] = {}
    with open(args.snapshot, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                cid = int(obj["class_id"])
                per_class.setdefault(cid, []).append((float(obj["entropy"]), float(obj["confidence"])))
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad snapshot line {line_no}: {exc}", offset=line_no) from None
    total = 0
    for cid in sorted(per_class):
        entries = per_class[cid]
        total += len(entries)
        mean_ent = float(np.mean([e for e, _ in entries]))
        mean_conf = float(np.mean([c for _, c in entries]))
        print(
            f"class={cid} entries={len(entries)} mean_entropy={mean_ent:.4f} mean_confidence={mean_conf:.4f}"
        )
    print(f"total_entries={total} classes_populated={len(per_class)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewadapt",
        description="Streaming cross-view adaptation for action anticipation features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a paired source/target synthetic dataset")
    _add_config_flags(p)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--labels-per-sample", type=int, dest="labels_per_sample", default=2)
    p.add_argument("--angle", type=float, default=0.6, help="inter-view rotation in radians")
    p.add_argument("--sigma", type=float, default=0.1, help="inter-view noise scale")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--frames", type=int, default=5)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("train-source", help="fit the anticipation head on a labeled source container")
    _add_config_flags(p)
    p.add_argument("--source", required=True, help="labeled source container")
    p.add_argument("--internal-dim", type=int, dest="internal_dim", default=64)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--source-lr", type=float, dest="source_lr", default=0.1)
    p.set_defaults(func=_cmd_train_source)

    p = sub.add_parser("adapt", help="adapt to a target stream and evaluate")
    _add_config_flags(p)
    _add_toggle_flags(p)
    p.add_argument("--head", required=True, help="trained head checkpoint")
    p.add_argument("--target", required=True, help="target stream container")
    p.add_argument("--labels", help="evaluation labels JSON")
    p.add_argument("--table", help="class feature table checkpoint (random unit rows if omitted)")
    p.add_argument("--setting", default=None, help="report row label (default: full, or baseline with --no-adaptation)")
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("sweep", help="repeat adapt over one axis")
    _add_config_flags(p)
    _add_toggle_flags(p)
    p.add_argument("--head", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--labels")
    p.add_argument("--table")
    p.add_argument("--setting", default=None)
    p.add_argument("--axis", required=True, choices=["k", "bank_capacity", "alpha", "mu1", "mu2", "fraction"])
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("inspect-banks", help="summarize a bank snapshot")
    p.add_argument("--snapshot", required=True, help="banks.jsonl written by adapt")
    p.set_defaults(func=_cmd_inspect_banks)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except EmptyEvaluation as exc:
        print(f"empty evaluation: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
