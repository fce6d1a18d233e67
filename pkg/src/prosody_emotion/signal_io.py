"""WAV decoding, resampling and dataset directory scanning."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .taxonomy import EmotionLabel, UnknownLabelError, parse_label

logger = logging.getLogger(__name__)

CANONICAL_SR = 16000
MIN_DURATION = 0.2
MAX_DURATION = 60.0

# full-scale divisors for integer PCM as returned by scipy (24-bit arrives left-justified in int32)
_FULL_SCALE = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2.0**31}


class AudioDecodeError(Exception):
    def __init__(self, path, cause):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{self.path}: {cause}")


class EmptyDatasetError(Exception):
    pass


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    source_path: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("clip samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("clip samples must be finite")
        if np.max(np.abs(samples)) > 1.0:
            raise ValueError("clip samples must lie in [-1, 1]")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample rate must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype in _FULL_SCALE:
        return data.astype(np.float64) / _FULL_SCALE[data.dtype]
    if data.dtype == np.float32 or data.dtype == np.float64:
        return np.clip(data.astype(np.float64), -1.0, 1.0)
    raise ValueError(f"unsupported sample type {data.dtype}")


def load_clip(path, min_duration: float = MIN_DURATION,
              max_duration: float = MAX_DURATION) -> AudioClip:
    """Decode a PCM WAV file into a mono clip with samples in [-1, 1].

    Stereo input is averaged to mono. Integer PCM is scaled by its
    full-scale value. Raises AudioDecodeError naming the file and cause.
    """
    path = Path(path)
    try:
        sr, data = wavfile.read(path)
    except FileNotFoundError:
        raise AudioDecodeError(path, "file not found") from None
    except (ValueError, EOFError, OSError) as exc:
        raise AudioDecodeError(path, f"unreadable or unsupported WAV ({exc})") from None
    try:
        x = _to_float(data)
    except ValueError as exc:
        raise AudioDecodeError(path, str(exc)) from None
    if x.ndim == 2:
        if x.shape[1] not in (1, 2):
            raise AudioDecodeError(path, f"{x.shape[1]} channels (only mono/stereo supported)")
        x = x.mean(axis=1)
    if x.size == 0:
        raise AudioDecodeError(path, "zero-length audio")
    duration = x.size / sr
    if not (min_duration <= duration <= max_duration):
        raise AudioDecodeError(
            path, f"duration {duration:.3f} s outside [{min_duration}, {max_duration}] s")
    return AudioClip(x, sr, str(path))


def write_clip(clip: AudioClip, path, bit_depth: int = 16) -> None:
    """Write a clip as integer PCM (8/16/32 bit) or 32-bit float WAV when bit_depth='float'."""
    x = clip.samples
    if bit_depth == 16:
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif bit_depth == 32:
        data = np.clip(np.round(x * 2.0**31), -2.0**31, 2.0**31 - 1).astype(np.int32)
    elif bit_depth == 8:
        data = np.clip(np.round(x * 128.0 + 128.0), 0, 255).astype(np.uint8)
    elif bit_depth == "float":
        data = x.astype(np.float32)
    else:
        raise ValueError(f"unsupported bit depth {bit_depth!r}")
    wavfile.write(path, clip.sample_rate, data)


def resample(clip: AudioClip, target_sr: int, method: str = "linear") -> AudioClip:
    """Resample ``clip`` to ``target_sr``.

    ``method="linear"`` interpolates linearly at times i / target_sr.
    ``method="polyphase"`` uses a windowed-sinc polyphase filter and keeps
    more of the band near Nyquist. Either way the output duration matches
    the input to within one sample.
    """
    if target_sr <= 0:
        raise ValueError("target sample rate must be positive")
    if target_sr == clip.sample_rate:
        return clip
    n_in = len(clip.samples)
    n_out = max(1, int(round(n_in * target_sr / clip.sample_rate)))
    if method == "linear":
        t_out = np.arange(n_out) / target_sr
        t_in = np.arange(n_in) / clip.sample_rate
        y = np.interp(t_out, t_in, clip.samples)
    elif method == "polyphase":
        g = np.gcd(int(target_sr), clip.sample_rate)
        y = resample_poly(clip.samples, target_sr // g, clip.sample_rate // g, padtype="line")
        y = np.clip(y[:n_out], -1.0, 1.0)
        if len(y) < n_out:
            y = np.pad(y, (0, n_out - len(y)), mode="edge")
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    return AudioClip(y, target_sr, clip.source_path)


@dataclass(frozen=True)
class ManifestEntry:
    clip_path: str
    emotion: EmotionLabel
    singer_id: str


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def singers(self) -> list[str]:
        return sorted({e.singer_id for e in self.entries})

    def filter_singers(self, singers) -> "DatasetManifest":
        keep = set(singers)
        return DatasetManifest(self.root, tuple(e for e in self.entries if e.singer_id in keep))

    def absolute(self, entry: ManifestEntry) -> Path:
        return self.root / entry.clip_path

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["clip_path", "singer_id", "emotion"])
            for e in self.entries:
                w.writerow([e.clip_path, e.singer_id, e.emotion.name])

    @classmethod
    def from_csv(cls, path, root) -> "DatasetManifest":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(Path(root), tuple(
            ManifestEntry(r["clip_path"], parse_label(r["emotion"]), r["singer_id"]) for r in rows))


def scan_dataset(root) -> DatasetManifest:
    """Scan ``root/<singer_id>/<emotion>/<clip>.wav`` into a manifest.

    Emotion directories that do not name one of the 20 labels are skipped
    with a warning. Entries are ordered lexicographically by relative path.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    entries = []
    for singer_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for emo_dir in sorted(p for p in singer_dir.iterdir() if p.is_dir()):
            try:
                label = parse_label(emo_dir.name)
            except UnknownLabelError:
                logger.warning("skipping %s: %r is not a known emotion", emo_dir, emo_dir.name)
                continue
            for wav in sorted(emo_dir.iterdir()):
                if wav.is_file() and wav.suffix.lower() == ".wav":
                    entries.append(ManifestEntry(
                        wav.relative_to(root).as_posix(), label, singer_dir.name))
    if not entries:
        raise EmptyDatasetError(f"no labeled WAV files found under {root}")
    entries.sort(key=lambda e: e.clip_path)
    return DatasetManifest(root, tuple(entries))
