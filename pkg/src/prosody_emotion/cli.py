"""Command-line experiment runner: ``extract``, ``train-eval``, ``select`` and ``report``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import evaluation, selection
from .aggregation import (AggregationParams, ClipFeatureVector, StaleCacheError, extract_clip,
                          read_cache, write_cache)
from .classifiers import CLASSICAL_FAMILIES, FAMILIES, LabeledSet, save_model
from .evaluation import DegenerateSplitError, SplitSpec
from .signal_io import CANONICAL_SR, AudioDecodeError, EmptyDatasetError, load_clip, resample, scan_dataset
from .taxonomy import UnknownLabelError, parse_label

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("prosody_emotion")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
MAX_FAIL_FRACTION = 0.10
_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    data: str | None = None
    cache: str | None = None
    out: str | None = None
    taxonomy: str = "emotions20"
    singers: list | None = None
    family: str = "all"
    grid: list | None = None
    seed: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    max_features: int | None = None
    probe_epochs: int = selection.FFNN_EPOCHS
    test_singers: list | None = None
    st_win: float = 0.05
    st_step: float = 0.05
    mt_win: float = 1.0
    mt_step: float = 1.0
    split: list = field(default_factory=lambda: [0.70, 0.15, 0.15])

    @property
    def params(self) -> AggregationParams:
        return AggregationParams(self.st_win, self.st_step, self.mt_win, self.mt_step)

    def config_hash(self) -> str:
        """Hash of everything that can change results (not paths' output location or threads)."""
        d = asdict(self)
        for k in ("out", "threads"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def families(self) -> list[str]:
        if self.family == "all":
            return list(CLASSICAL_FAMILIES)
        fams = [f.strip() for f in self.family.split(",") if f.strip()]
        for f in fams:
            if f not in FAMILIES:
                raise UsageError(f"unknown family {f!r}; choose from all, {', '.join(FAMILIES)}")
        return fams


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _grid_values(items):
    out = []
    for t in items:
        v = float(t)
        out.append(int(v) if v.is_integer() and "." not in str(t) else v)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="TOML file with run settings; flags override it")
    g.add_argument("--data", help="dataset root laid out as <singer>/<emotion>/<clip>.wav")
    g.add_argument("--cache", help="feature cache CSV (default: <out>/features.csv)")
    g.add_argument("--out", help="output directory")
    g.add_argument("--taxonomy", help="emotions20 | big4 | pair:<e1>:<e2>")
    g.add_argument("--singers", help="comma-separated singer ids to keep (default: all)")
    g.add_argument("--test-singers", help="hold these singers out as the test set")
    g.add_argument("--family", help="all | comma-separated families: " + ", ".join(FAMILIES))
    g.add_argument("--grid", help="comma-separated hyperparameter values (single family only)")
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--max-features", type=int, dest="max_features")
    g.add_argument("--probe-epochs", type=int, dest="probe_epochs")
    g.add_argument("--st-win", type=float, dest="st_win")
    g.add_argument("--st-step", type=float, dest="st_step")
    g.add_argument("--mt-win", type=float, dest="mt_win")
    g.add_argument("--mt-step", type=float, dest="mt_step")

    p = _Parser(prog="prosody-emotion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("extract", parents=[common], help="decode clips and write the feature cache")
    sub.add_parser("train-eval", parents=[common], help="split, sweep, evaluate and write artifacts")
    sub.add_parser("select", parents=[common], help="additive feature selection with the network probe")
    rp = sub.add_parser("report", parents=[common], help="print metrics.json as a results table")
    rp.add_argument("metrics", nargs="?", help="metrics.json path (default: <out>/metrics.json)")
    return p


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    values = {}
    if ns.config:
        try:
            with open(ns.config, "rb") as fh:
                values.update(tomllib.load(fh))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
    for key in ("data", "cache", "out", "taxonomy", "family", "seed", "threads", "max_features",
                "probe_epochs", "st_win", "st_step", "mt_win", "mt_step"):
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    for key in ("singers", "test_singers"):
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = _csv_list(v)
    if ns.grid is not None:
        values["grid"] = _csv_list(ns.grid)
    known = set(asdict(cfg))
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for k in ("singers", "test_singers"):
        if isinstance(values.get(k), str):
            values[k] = _csv_list(values[k])
    if values.get("grid") is not None:
        values["grid"] = _grid_values([str(x) for x in values["grid"]])
    cfg = replace(cfg, **values)
    try:
        cfg.params
        SplitSpec(*cfg.split, seed=cfg.seed)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if cfg.taxonomy not in ("emotions20", "big4") and not cfg.taxonomy.startswith("pair:"):
        raise UsageError(f"unknown taxonomy {cfg.taxonomy!r}")
    if cfg.cache is None and cfg.out is not None:
        cfg.cache = str(Path(cfg.out) / "features.csv")
    return cfg


# extract --------------------------------------------------------------------

def _sizes_path(cache) -> Path:
    return Path(str(cache) + ".sizes.json")


def cmd_extract(cfg: RunConfig) -> int:
    if not cfg.data:
        raise UsageError("extract needs --data")
    if not cfg.cache:
        raise UsageError("extract needs --cache or --out")
    manifest = scan_dataset(cfg.data)
    if cfg.singers:
        manifest = manifest.filter_singers(cfg.singers)
        if not len(manifest):
            raise DataError(f"no clips for singers {cfg.singers}")
    cache = Path(cfg.cache)
    cache.parent.mkdir(parents=True, exist_ok=True)
    old, old_sizes = {}, {}
    if cache.exists() and _sizes_path(cache).exists():
        try:
            old = {v.clip_path: v for v in read_cache(cache, cfg.params)}
            old_sizes = json.loads(_sizes_path(cache).read_text(encoding="utf-8"))
        except (StaleCacheError, ValueError, KeyError) as exc:
            logger.info("ignoring existing cache: %s", exc)
            old, old_sizes = {}, {}

    def work(entry):
        path = manifest.absolute(entry)
        size = path.stat().st_size
        hit = old.get(entry.clip_path)
        if hit is not None and old_sizes.get(entry.clip_path) == size and hit.label == entry.emotion \
                and hit.singer_id == entry.singer_id:
            return entry, hit, size, False
        try:
            clip = resample(load_clip(path), CANONICAL_SR)
            v = extract_clip(clip, cfg.params, entry.emotion, entry.singer_id)
        except (AudioDecodeError, ValueError) as exc:
            logger.warning("skipping %s: %s", entry.clip_path, exc)
            return entry, None, size, True
        return entry, ClipFeatureVector(v.values, entry.emotion, entry.singer_id, entry.clip_path), size, True

    with ThreadPoolExecutor(max(1, cfg.threads)) as pool:
        results = list(pool.map(work, manifest.entries))
    rows = [v for _, v, _, _ in results if v is not None]
    failed = sum(1 for _, v, _, _ in results if v is None)
    extracted = sum(1 for _, v, _, fresh in results if v is not None and fresh)
    write_cache(cache, rows, cfg.params)
    sizes = {e.clip_path: s for e, v, s, _ in results if v is not None}
    _sizes_path(cache).write_text(json.dumps(sizes, sort_keys=True, indent=0) + "\n", encoding="utf-8")
    logger.info("extract: %d extracted, %d reused, %d failed", extracted, len(rows) - extracted, failed)
    print(f"extracted={extracted} reused={len(rows) - extracted} failed={failed} cache={cache}")
    if failed > MAX_FAIL_FRACTION * len(manifest):
        logger.error("%d of %d clips failed (more than %.0f%%)", failed, len(manifest), 100 * MAX_FAIL_FRACTION)
        return EXIT_DATA
    return EXIT_OK


# shared data loading --------------------------------------------------------

@dataclass
class Task:
    data: LabeledSet
    singers: np.ndarray
    names: list


def load_task(cfg: RunConfig) -> Task:
    if not cfg.cache or not Path(cfg.cache).exists():
        raise DataError(f"feature cache {cfg.cache} not found; run extract first")
    vectors = [v for v in read_cache(cfg.cache, cfg.params) if v.label is not None]
    if cfg.singers:
        vectors = [v for v in vectors if v.singer_id in set(cfg.singers)]
    if not vectors:
        raise DataError("no labelled clips in the feature cache for this selection")
    X = np.vstack([v.values for v in vectors])
    y = np.array([int(v.label) for v in vectors])
    singers = np.array([v.singer_id or "" for v in vectors])
    names = evaluation.class_names(cfg.taxonomy)
    if cfg.taxonomy == "emotions20":
        data = LabeledSet(X, y, 20)
    elif cfg.taxonomy == "big4":
        data = evaluation.quadrant_task(LabeledSet(X, y, 20))
    else:
        _, a, b = cfg.taxonomy.split(":")
        e1, e2 = parse_label(a), parse_label(b)
        keep = (y == int(e1)) | (y == int(e2))
        try:
            data = evaluation.pairwise_task(LabeledSet(X, y, 20), e1, e2)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        singers = singers[keep]
    return Task(data, singers, names)


def split_task(task: Task, cfg: RunConfig):
    if cfg.test_singers:
        tr, va, te = evaluation.singer_holdout_split(task.singers, task.data.labels, cfg.test_singers,
                                                     cfg.split[1] / (cfg.split[0] + cfg.split[1]), cfg.seed)
        mode = {"mode": "singer_holdout", "test_singers": sorted(cfg.test_singers)}
    else:
        spec = SplitSpec(*cfg.split, seed=cfg.seed)
        groups = None
        if len(set(task.singers.tolist())) > 1:
            keys = list(zip(task.data.labels.tolist(), task.singers.tolist()))
            if min(keys.count(k) for k in set(keys)) >= 3:
                groups = task.singers.tolist()
        tr, va, te = evaluation.stratified_split(task.data.labels, spec, groups)
        mode = {"mode": "stratified", "stratify_singer": groups is not None}
    mode.update({"fractions": list(cfg.split), "seed": cfg.seed,
                 "n_train": len(tr), "n_val": len(va), "n_test": len(te)})
    k = task.data.class_count
    if min(len(tr), len(va), len(te)) < k:
        raise DegenerateSplitError(
            f"partition sizes {len(tr)}/{len(va)}/{len(te)} cannot hold all {k} classes of "
            f"the {cfg.taxonomy} taxonomy; add clips or choose a coarser taxonomy")
    parts = [LabeledSet(task.data.vectors[idx], task.data.labels[idx], k) for idx in (tr, va, te)]
    return parts, mode


def _csv_stamp(cfg):
    return f"# config_hash={cfg.config_hash()} seed={cfg.seed}\n"


def _stamp_csv(path, cfg):
    body = Path(path).read_text(encoding="utf-8")
    Path(path).write_text(_csv_stamp(cfg) + body, encoding="utf-8")


# train-eval -----------------------------------------------------------------

def cmd_train_eval(cfg: RunConfig) -> int:
    if not cfg.out:
        raise UsageError("train-eval needs --out")
    families = cfg.families()
    if cfg.grid is not None and len(families) != 1:
        raise UsageError("--grid needs exactly one --family")
    task = load_task(cfg)
    (train, val, test), split_info = split_task(task, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results, summaries = [], []
    for fam in families:
        logger.info("sweeping %s", fam)
        r = evaluation.sweep(fam, train, val, test, cfg.grid, cfg.seed, max(1, cfg.threads))
        results.append(r)
        summaries.append(evaluation.sweep_summary(r, task.names))
        fam_dir = out if len(families) == 1 else out / fam
        fam_dir.mkdir(parents=True, exist_ok=True)
        evaluation.write_confusion_csv(fam_dir / "confusion.csv", r.test, task.names)
        _stamp_csv(fam_dir / "confusion.csv", cfg)
        model = r.model.to_dict()
        model["config_hash"] = cfg.config_hash()
        evaluation.write_json(fam_dir / "model.json", model)
    evaluation.write_sweep_csv(out / "sweep.csv", results)
    _stamp_csv(out / "sweep.csv", cfg)
    evaluation.write_json(out / "metrics.json", {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "taxonomy": cfg.taxonomy,
        "singers": sorted(set(task.singers.tolist())),
        "classes": task.names,
        "split": split_info,
        "results": summaries,
    })
    print(format_report(json.loads((out / "metrics.json").read_text(encoding="utf-8"))))
    return EXIT_OK


# select ---------------------------------------------------------------------

def cmd_select(cfg: RunConfig) -> int:
    if not cfg.out:
        raise UsageError("select needs --out")
    task = load_task(cfg)
    (train, val, _), split_info = split_task(task, cfg)
    probe = selection.ProbeConfig(epochs=cfg.probe_epochs)
    t0 = time.perf_counter()
    trace = selection.additive_selection(train, val, probe, cfg.seed, cfg.max_features, max(1, cfg.threads))
    wall = time.perf_counter() - t0
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    selection.write_selection_csv(out / "selection.csv", trace)
    _stamp_csv(out / "selection.csv", cfg)
    meta = selection.selection_meta(trace)
    meta.update({"config_hash": cfg.config_hash(), "taxonomy": cfg.taxonomy, "split": split_info,
                 "wall_clock_s": round(wall, 3),
                 "models_trained_full_run": selection.models_for(train.feature_count)})
    evaluation.write_json(out / "selection_meta.json", meta)
    print(f"selected={len(trace.ranking)} models_trained={trace.models_trained} "
          f"best_f1={max(trace.f1_curve):.1f}")
    return EXIT_OK


# report ---------------------------------------------------------------------

def format_report(metrics: dict) -> str:
    title = f"{metrics.get('taxonomy', '?')} taxonomy, {len(metrics.get('singers', []))} singer(s)"
    rows = [("Model", "Accuracy", "F1", "Hyperparam")]
    for r in metrics["results"]:
        hp = ", ".join(f"{k}={v}" for k, v in r["best_hyperparams"].items())
        rows.append((r["model"], f"{r['accuracy']:.1f}", f"{r['macro_f1']:.1f}", hp))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = [title]
    for n, row in enumerate(rows):
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))))
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def cmd_report(cfg: RunConfig, metrics_path=None) -> int:
    path = Path(metrics_path) if metrics_path else (Path(cfg.out) / "metrics.json" if cfg.out else None)
    if path is None:
        raise UsageError("report needs a metrics.json path or --out")
    if not path.exists():
        raise DataError(f"{path} not found")
    print(format_report(json.loads(path.read_text(encoding="utf-8"))))
    return EXIT_OK


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("PROSODY_LOG", "warn").strip().lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        if ns.command == "extract":
            return cmd_extract(cfg)
        if ns.command == "train-eval":
            return cmd_train_eval(cfg)
        if ns.command == "select":
            return cmd_select(cfg)
        return cmd_report(cfg, ns.metrics)
    except UsageError as exc:
        print(f"prosody-emotion: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, AudioDecodeError, EmptyDatasetError, StaleCacheError, DegenerateSplitError,
            UnknownLabelError, FileNotFoundError) as exc:
        print(f"prosody-emotion: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # noqa: BLE001
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
