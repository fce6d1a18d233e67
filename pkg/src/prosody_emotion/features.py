"""The 34 short-term features computed on every frame.

Functions accept a single frame/spectrum (1-D) or a stack of them with
frames along the first axis; reductions always run over the last axis.
"""

from __future__ import annotations

import numpy as np

from . import dsp
from .dsp import Spectrum

N_MFCC = 13
N_MEL = 40
N_CHROMA = 12
N_SUB = 10
ROLLOFF_FRACTION = 0.90
LOG_FLOOR = 1e-10

FEATURE_NAMES = (
    ["zcr", "energy", "energy_entropy", "spectral_centroid", "spectral_spread",
     "spectral_entropy", "spectral_flux", "spectral_rolloff"]
    + [f"mfcc_{i}" for i in range(1, N_MFCC + 1)]
    + [f"chroma_{i}" for i in range(1, N_CHROMA + 1)]
    + ["chroma_deviation"]
)
N_FEATURES = len(FEATURE_NAMES)  # 34


def _entropy_of(parts):
    """Base-2 entropy of the normalised last axis; uniform when the total is zero."""
    total = parts.sum(axis=-1, keepdims=True)
    n = parts.shape[-1]
    p = np.where(total > 0, parts / np.where(total > 0, total, 1.0), 1.0 / n)
    logp = np.log2(np.where(p > 0, p, 1.0))
    return -np.sum(p * logp, axis=-1)


def zcr(frame):
    """Fraction of adjacent sample pairs whose signs differ (zero counts as positive)."""
    frame = np.asarray(frame, dtype=float)
    s = frame >= 0
    return np.count_nonzero(s[..., 1:] != s[..., :-1], axis=-1) / (frame.shape[-1] - 1)


def short_time_energy(frame):
    frame = np.asarray(frame, dtype=float)
    return np.mean(frame * frame, axis=-1)


def energy_entropy(frame, n_sub: int = N_SUB):
    frame = np.asarray(frame, dtype=float)
    sub = frame.shape[-1] // n_sub
    if sub == 0:
        raise ValueError("frame shorter than the number of sub-frames")
    blocks = frame[..., : sub * n_sub].reshape(frame.shape[:-1] + (n_sub, sub))
    return _entropy_of(np.sum(blocks * blocks, axis=-1))


def _as_mags(spectrum):
    if isinstance(spectrum, Spectrum):
        return spectrum.magnitudes, spectrum.bin_hz
    return np.asarray(spectrum, dtype=float), None


def spectral_centroid_spread(spectrum, bin_hz: float | None = None):
    """Centre of mass and spread (Hz) of the power spectrum; both 0 for silence."""
    mags, hz = _as_mags(spectrum)
    bin_hz = hz if bin_hz is None else bin_hz
    f = np.arange(mags.shape[-1]) * bin_hz
    w = mags * mags
    total = w.sum(axis=-1)
    safe = np.where(total > 0, total, 1.0)
    centroid = np.where(total > 0, (w * f).sum(axis=-1) / safe, 0.0)
    var = ((f - centroid[..., None]) ** 2 * w).sum(axis=-1) / safe
    spread = np.where(total > 0, np.sqrt(np.maximum(var, 0.0)), 0.0)
    return centroid, spread


def spectral_entropy(spectrum, n_blocks: int = N_SUB):
    mags, _ = _as_mags(spectrum)
    size = mags.shape[-1] // n_blocks
    if size == 0:
        raise ValueError("spectrum shorter than the number of blocks")
    power = (mags * mags)[..., : size * n_blocks]
    return _entropy_of(power.reshape(mags.shape[:-1] + (n_blocks, size)).sum(axis=-1))


def _l1(mags):
    s = mags.sum(axis=-1, keepdims=True)
    return np.where(s > 0, mags / np.where(s > 0, s, 1.0), mags)


def spectral_flux(spectrum, prev_spectrum):
    """Euclidean distance between consecutive L1-normalised magnitude spectra."""
    cur, _ = _as_mags(spectrum)
    prev, _ = _as_mags(prev_spectrum)
    if cur.shape != prev.shape:
        raise ValueError(f"spectrum length mismatch: {cur.shape} vs {prev.shape}")
    d = _l1(cur) - _l1(prev)
    return np.sqrt(np.sum(d * d, axis=-1))


def spectral_rolloff(spectrum, fraction: float = ROLLOFF_FRACTION, bin_hz: float | None = None):
    mags, hz = _as_mags(spectrum)
    bin_hz = hz if bin_hz is None else bin_hz
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    cum = np.cumsum(mags * mags, axis=-1)
    total = cum[..., -1]
    k = np.argmax(cum >= fraction * total[..., None], axis=-1)
    return np.where(total > 0, k * bin_hz, 0.0)


def mfcc(spectrum, bank: dsp.MelFilterBank, n_mfcc: int = N_MFCC):
    mags, _ = _as_mags(spectrum)
    energies = (mags * mags) @ bank.weights.T
    return dsp.dct_ii(np.log(energies + LOG_FLOOR), n_mfcc)


def chroma_features(spectrum, chroma_map: np.ndarray):
    """Normalised 12-bin pitch-class energy and its population standard deviation."""
    mags, _ = _as_mags(spectrum)
    power = mags * mags
    onehot = (chroma_map[:, None] == np.arange(N_CHROMA)[None, :]).astype(float)
    energy = power @ onehot
    total = energy.sum(axis=-1, keepdims=True)
    chroma = np.where(total > 0, energy / np.where(total > 0, total, 1.0), 0.0)
    return chroma, chroma.std(axis=-1)


def extract_frames(frames: np.ndarray, sample_rate: int) -> np.ndarray:
    """Feature matrix (T, 34) for a stack of consecutive frames of one clip.

    The first frame's flux compares the frame with itself.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=float))
    n = frames.shape[1]
    mags = dsp.magnitude_spectra(frames)
    prev = np.concatenate([mags[:1], mags[:-1]], axis=0)
    return _compose(frames, mags, prev, sample_rate / n, sample_rate, n)


def _compose(frames, mags, prev, bin_hz, sample_rate, n):
    bank = dsp.build_mel_filterbank(sample_rate, mags.shape[-1], N_MEL, frame_len=n)
    cmap = dsp.build_chroma_map(sample_rate, mags.shape[-1], frame_len=n)
    centroid, spread = spectral_centroid_spread(mags, bin_hz)
    chroma, chroma_dev = chroma_features(mags, cmap)
    cols = [
        zcr(frames), short_time_energy(frames), energy_entropy(frames),
        centroid, spread, spectral_entropy(mags), spectral_flux(mags, prev),
        spectral_rolloff(mags, ROLLOFF_FRACTION, bin_hz),
    ]
    return np.column_stack(cols + [mfcc(mags, bank), chroma, chroma_dev])


def extract_frame(frame, prev_spectrum: Spectrum | None = None, sample_rate: int = 16000):
    """34 features of one frame plus its spectrum, to be passed as ``prev_spectrum`` next.

    With ``prev_spectrum=None`` the frame is treated as the first of its clip.
    """
    frame = np.asarray(frame, dtype=float)
    spec = dsp.magnitude_spectrum(frame, sample_rate)
    prev = spec.magnitudes if prev_spectrum is None else prev_spectrum.magnitudes
    vec = _compose(frame[None, :], spec.magnitudes[None, :], prev[None, :],
                   spec.bin_hz, sample_rate, frame.size)[0]
    return vec, spec
