"""Seeded synthetic audio for tests, demos and smoke runs.

Nothing here models real singing; the clip types are chosen to be easy to
separate on energy, centroid, flux and rolloff.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .signal_io import CANONICAL_SR, AudioClip, write_clip
from .taxonomy import EmotionLabel

CLIP_KINDS = ("tremolo_low", "high_tone", "noise_burst", "up_chirp")

# one emotion per quadrant, so the four kinds also form a balanced big-4 problem
KIND_EMOTIONS = (EmotionLabel.Anger, EmotionLabel.Joy, EmotionLabel.Sadness, EmotionLabel.Love)


def synth_clip(kind: str, rng: np.random.Generator, duration: float = 1.0,
               sr: int = CANONICAL_SR) -> AudioClip:
    t = np.arange(int(round(duration * sr))) / sr
    if kind == "tremolo_low":
        f0 = rng.uniform(150, 250)
        rate = rng.uniform(4, 8)
        x = (0.6 + 0.3 * np.sin(2 * np.pi * rate * t)) * np.sin(2 * np.pi * f0 * t + rng.uniform(0, 2 * np.pi))
    elif kind == "high_tone":
        f0 = rng.uniform(2500, 3500)
        x = 0.3 * np.sin(2 * np.pi * f0 * t + rng.uniform(0, 2 * np.pi))
    elif kind == "noise_burst":
        env = np.zeros_like(t)
        n_bursts = rng.integers(3, 7)
        for _ in range(n_bursts):
            c = rng.uniform(0, duration)
            env += np.exp(-0.5 * ((t - c) / 0.04) ** 2)
        x = np.clip(env, 0, 1) * rng.normal(0, 0.3, t.size)
    elif kind == "up_chirp":
        f_lo, f_hi = rng.uniform(300, 500), rng.uniform(1500, 2500)
        phase = 2 * np.pi * (f_lo * t + 0.5 * (f_hi - f_lo) / duration * t ** 2)
        x = 0.5 * np.sin(phase)
    else:
        raise ValueError(f"unknown clip kind {kind!r}")
    x = x + rng.normal(0, 0.005, t.size)
    return AudioClip(np.clip(x, -1, 1), sr, kind)


def four_class_clips(per_class: int, seed: int = 0, duration: float = 1.0):
    """(clips, labels) with ``per_class`` clips of each kind, interleaved by class."""
    rng = np.random.default_rng(seed)
    clips, labels = [], []
    for i in range(per_class):
        for k, kind in enumerate(CLIP_KINDS):
            clips.append(synth_clip(kind, rng, duration))
            labels.append(k)
    return clips, np.asarray(labels)


def tone_clip(emotion_code: int, rng: np.random.Generator, duration: float = 1.0,
              sr: int = CANONICAL_SR) -> AudioClip:
    """A jittered tone whose pitch and loudness depend on the emotion code (for 20-class smoke data)."""
    t = np.arange(int(round(duration * sr))) / sr
    f0 = 180.0 * 2 ** (emotion_code / 6.0) * rng.uniform(0.98, 1.02)
    amp = 0.2 + 0.03 * (emotion_code % 5) + rng.uniform(-0.01, 0.01)
    x = amp * np.sin(2 * np.pi * f0 * t) + rng.normal(0, 0.01 * (1 + emotion_code % 3), t.size)
    return AudioClip(np.clip(x, -1, 1), sr, f"tone_{emotion_code}")


def write_dataset(root, singers=("s1",), per_emotion: int = 2, seed: int = 0,
                  emotions=None, kind: str = "four_class", duration: float = 1.0) -> Path:
    """Write ``root/<singer>/<emotion>/<n>.wav``.

    ``kind="four_class"`` uses the four easy clip kinds (emotions default to
    one per quadrant); ``kind="tones"`` writes emotion-dependent tones for any
    emotion list (default all 20).
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    if kind == "four_class":
        emotions = list(KIND_EMOTIONS) if emotions is None else list(emotions)
        make = lambda e, i: synth_clip(CLIP_KINDS[i % len(CLIP_KINDS)], rng, duration)
    elif kind == "tones":
        emotions = list(EmotionLabel) if emotions is None else list(emotions)
        make = lambda e, i: tone_clip(int(e), rng, duration)
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    for singer in singers:
        for i, emo in enumerate(emotions):
            d = root / singer / EmotionLabel(emo).name.lower()
            d.mkdir(parents=True, exist_ok=True)
            for j in range(per_emotion):
                write_clip(make(emo, i), d / f"{j:03d}.wav")
    return root
