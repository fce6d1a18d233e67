"""Framing, windowed spectra, mel filterbank, DCT-II and pitch-class mapping."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .signal_io import AudioClip

CHROMA_MIN_HZ = 27.5
A4_HZ = 440.0


@dataclass(frozen=True)
class FrameSequence:
    frames: np.ndarray  # (T, N)
    frame_len: int
    step: int
    sample_rate: int

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True)
class Spectrum:
    magnitudes: np.ndarray
    bin_hz: float

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(len(self.magnitudes)) * self.bin_hz


@dataclass(frozen=True)
class MelFilterBank:
    weights: np.ndarray  # (n_filters, n_bins)
    edges_hz: np.ndarray  # n_filters + 2 points; filter j spans edges[j]..edges[j+2]

    @property
    def n_filters(self) -> int:
        return self.weights.shape[0]

    @property
    def centers_hz(self) -> np.ndarray:
        return self.edges_hz[1:-1]

    def response(self, freqs) -> np.ndarray:
        """Continuous filter responses at arbitrary frequencies, shape (n_filters, len(freqs))."""
        return _triangles(np.asarray(freqs, dtype=float), self.edges_hz)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def frame_signal(clip: AudioClip, win_s: float, step_s: float) -> FrameSequence:
    """Split a clip into contiguous frames; the tail shorter than a window is dropped."""
    if win_s <= 0 or step_s <= 0:
        raise ValueError("window and step must be positive")
    n = int(round(win_s * clip.sample_rate))
    step = int(round(step_s * clip.sample_rate))
    if len(clip.samples) < n:
        raise ValueError(
            f"clip of {clip.duration:.3f} s is shorter than one {win_s} s window")
    view = np.lib.stride_tricks.sliding_window_view(clip.samples, n)[::step]
    return FrameSequence(np.ascontiguousarray(view), n, step, clip.sample_rate)


@lru_cache(maxsize=16)
def _hamming(n: int) -> np.ndarray:
    w = np.hamming(n)
    w.setflags(write=False)
    return w


def magnitude_spectra(frames: np.ndarray) -> np.ndarray:
    """Hamming-windowed |rfft| of each row, at the exact frame length."""
    frames = np.asarray(frames, dtype=float)
    return np.abs(np.fft.rfft(frames * _hamming(frames.shape[-1]), axis=-1))


def magnitude_spectrum(frame, sample_rate: int = 16000) -> Spectrum:
    frame = np.asarray(frame, dtype=float)
    if frame.size < 2:
        raise ValueError("frame needs at least 2 samples")
    return Spectrum(magnitude_spectra(frame), sample_rate / frame.size)


def _triangles(freqs, edges):
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (freqs[None, :] - lo) / (mid - lo)
    down = (hi - freqs[None, :]) / (hi - mid)
    return np.maximum(0.0, np.minimum(up, down))


@lru_cache(maxsize=16)
def build_mel_filterbank(sample_rate: int, n_fft_bins: int, n_filters: int = 40,
                         frame_len: int | None = None) -> MelFilterBank:
    """Triangular filters with centres equally spaced in mel from 0 Hz to Nyquist.

    ``n_fft_bins`` is the rfft length, floor(N/2)+1; pass ``frame_len`` when N is odd.
    """
    if n_filters < 13:
        raise ValueError("need at least 13 mel filters")
    if n_fft_bins < n_filters:
        raise ValueError("fewer FFT bins than filters")
    nyquist = sample_rate / 2.0
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(nyquist), n_filters + 2))
    n = frame_len or 2 * (n_fft_bins - 1)
    freqs = np.arange(n_fft_bins) * sample_rate / n
    weights = _triangles(freqs, edges)
    weights.setflags(write=False)
    edges.setflags(write=False)
    return MelFilterBank(weights, edges)


def dct_ii(values, n_out: int | None = None) -> np.ndarray:
    """Orthonormal DCT-II along the last axis, truncated to the first ``n_out`` coefficients."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    n_out = n if n_out is None else n_out
    if n_out > n:
        raise ValueError("n_out exceeds input length")
    return scipy.fft.dct(values, type=2, norm="ortho", axis=-1)[..., :n_out]


@lru_cache(maxsize=16)
def build_chroma_map(sample_rate: int, n_fft_bins: int, frame_len: int | None = None) -> np.ndarray:
    """Pitch class (0 = A) of every rfft bin, or -1 for bins below 27.5 Hz."""
    n = frame_len or 2 * (n_fft_bins - 1)
    freqs = np.arange(n_fft_bins) * sample_rate / n
    classes = np.full(n_fft_bins, -1, dtype=np.int64)
    ok = freqs >= CHROMA_MIN_HZ
    classes[ok] = np.mod(np.round(12.0 * np.log2(freqs[ok] / A4_HZ)).astype(np.int64), 12)
    classes.setflags(write=False)
    return classes
