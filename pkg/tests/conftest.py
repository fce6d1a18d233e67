import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosody_emotion.classifiers import LabeledSet  # noqa: E402
from prosody_emotion.signal_io import AudioClip  # noqa: E402


def sine(freq, duration=1.0, sr=16000, amp=1.0, phase=0.0):
    t = np.arange(int(round(duration * sr))) / sr
    return amp * np.sin(2 * np.pi * freq * t + phase)


def sine_clip(freq, duration=1.0, sr=16000, amp=0.8):
    return AudioClip(sine(freq, duration, sr, amp), sr)


def blobs(n_classes, n_per_class, d, sep, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 1, (n_classes, d))
    centers *= sep / np.linalg.norm(centers[0] - centers[-1])
    y = np.repeat(np.arange(n_classes), n_per_class)
    X = centers[y] + rng.normal(0, noise, (len(y), d))
    return LabeledSet(X, y, n_classes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
