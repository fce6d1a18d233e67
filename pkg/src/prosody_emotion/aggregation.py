"""Short-term deltas, mid-term mean/std pooling and clip-level averaging.

A clip becomes a 34 x T feature matrix, 68 x T with deltas, 136 x M after
mid-term statistics, and finally one 136-vector.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import dsp
from .features import FEATURE_NAMES, N_FEATURES, extract_frames
from .signal_io import AudioClip
from .taxonomy import EmotionLabel, parse_label

FEATURE_ORDER_VERSION = "v1"
N_AGGREGATE = 4 * N_FEATURES  # 136


@dataclass(frozen=True)
class AggregationParams:
    st_win: float = 0.05
    st_step: float = 0.05
    mt_win: float = 1.0
    mt_step: float = 1.0

    def __post_init__(self):
        for name in ("st_win", "st_step", "mt_win", "mt_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.mt_win < self.st_win:
            raise ValueError("mid-term window shorter than short-term window")
        self.segment_frames  # validates ratios
        self.hop_frames

    @staticmethod
    def _ratio(a, b, what):
        r = a / b
        k = int(round(r))
        if k < 1 or abs(r - k) > 1e-6:
            raise ValueError(f"{what} must be a whole multiple of st_step")
        return k

    @property
    def segment_frames(self) -> int:
        return self._ratio(self.mt_win, self.st_step, "mt_win")

    @property
    def hop_frames(self) -> int:
        return self._ratio(self.mt_step, self.st_step, "mt_step")


def aggregate_feature_names() -> list[str]:
    """Names of the 136 clip-vector slots: mean/std over base/delta features."""
    base = list(FEATURE_NAMES) + [f"delta_{n}" for n in FEATURE_NAMES]
    return [f"mean_{n}" for n in base] + [f"std_{n}" for n in base]


def append_deltas(features: np.ndarray) -> np.ndarray:
    """Stack frame-to-frame differences under a (34, T) feature matrix; first column of deltas is zero."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] < 1:
        raise ValueError("expected a (features, T) matrix with T >= 1")
    deltas = np.zeros_like(features)
    deltas[:, 1:] = np.diff(features, axis=1)
    return np.vstack([features, deltas])


def segment_bounds(n_frames: int, params: AggregationParams) -> list[tuple[int, int]]:
    L, H = params.segment_frames, params.hop_frames
    if n_frames <= 0:
        raise ValueError("no short-term frames")
    bounds = []
    start = 0
    while start + L <= n_frames:
        bounds.append((start, start + L))
        start += H
    # trailing partial window kept when the frames no full window reached
    # number at least half a window
    covered = bounds[-1][1] if bounds else 0
    if start < n_frames and n_frames - covered >= L / 2:
        bounds.append((start, n_frames))
    if not bounds:
        # clip shorter than half a mid-term window: pool everything it has
        bounds.append((0, n_frames))
    return bounds


def midterm_stats(st: np.ndarray, params: AggregationParams = AggregationParams()) -> np.ndarray:
    """Per-segment row means stacked over population standard deviations, shape (2R, M)."""
    st = np.asarray(st, dtype=float)
    cols = []
    for a, b in segment_bounds(st.shape[1], params):
        seg = st[:, a:b]
        cols.append(np.concatenate([seg.mean(axis=1), seg.std(axis=1)]))
    return np.column_stack(cols)


@dataclass(frozen=True)
class ClipFeatureVector:
    values: np.ndarray
    label: EmotionLabel | None = None
    singer_id: str | None = None
    clip_path: str | None = None


def clip_vector(mt: np.ndarray, label=None, singer_id=None, clip_path=None) -> ClipFeatureVector:
    mt = np.asarray(mt, dtype=float)
    if mt.ndim != 2 or mt.shape[1] < 1:
        raise ValueError("expected a (136, M) matrix with M >= 1")
    return ClipFeatureVector(mt.mean(axis=1), label, singer_id, clip_path)


def short_term_matrix(clip: AudioClip, params: AggregationParams = AggregationParams()) -> np.ndarray:
    frames = dsp.frame_signal(clip, params.st_win, params.st_step)
    return append_deltas(extract_frames(frames.frames, clip.sample_rate).T)


def extract_clip(clip: AudioClip, params: AggregationParams = AggregationParams(),
                 label=None, singer_id=None) -> ClipFeatureVector:
    st = short_term_matrix(clip, params)
    return clip_vector(midterm_stats(st, params), label, singer_id, clip.source_path or None)


# feature cache -------------------------------------------------------------

class StaleCacheError(Exception):
    pass


def cache_header(params: AggregationParams) -> str:
    return "# prosody-feature-cache " + json.dumps(
        {"params": asdict(params), "feature_order": FEATURE_ORDER_VERSION}, sort_keys=True)


def write_cache(path, vectors, params: AggregationParams) -> None:
    """Write clip vectors as CSV rows ``clip_path,singer_id,emotion,f1..f136`` (9 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(cache_header(params) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["clip_path", "singer_id", "emotion"] + [f"f{i}" for i in range(1, N_AGGREGATE + 1)])
        for v in vectors:
            w.writerow([v.clip_path, v.singer_id or "", v.label.name if v.label is not None else ""]
                       + [f"{x:.9g}" for x in v.values])


def read_cache(path, params: AggregationParams | None = None) -> list[ClipFeatureVector]:
    """Load a feature cache; raises StaleCacheError if it was built with other params or layout."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# prosody-feature-cache "):
            raise StaleCacheError(f"{path}: missing cache header")
        meta = json.loads(first[len("# prosody-feature-cache "):])
        if meta.get("feature_order") != FEATURE_ORDER_VERSION:
            raise StaleCacheError(f"{path}: feature order {meta.get('feature_order')!r} is stale")
        if params is not None and meta.get("params") != asdict(params):
            raise StaleCacheError(f"{path}: built with {meta.get('params')}, expected {asdict(params)}")
        out = []
        for row in csv.DictReader(fh):
            values = np.array([float(row[f"f{i}"]) for i in range(1, N_AGGREGATE + 1)])
            label = parse_label(row["emotion"]) if row["emotion"] else None
            out.append(ClipFeatureVector(values, label, row["singer_id"] or None, row["clip_path"]))
    return out


def cache_params(path) -> AggregationParams:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith("# prosody-feature-cache "):
        raise StaleCacheError(f"{path}: missing cache header")
    return AggregationParams(**json.loads(first[len("# prosody-feature-cache "):])["params"])
