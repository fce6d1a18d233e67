"""Emotion classification of sung phrases from prosodic audio features.

Pipeline: ``load_clip`` -> ``extract_clip`` (34 short-term features, deltas,
mid-term mean/std, clip average = 136 values) -> a classifier from
``prosody_emotion.classifiers`` -> ``evaluation`` / ``selection``.
"""

from .aggregation import AggregationParams, ClipFeatureVector, aggregate_feature_names, extract_clip
from .features import FEATURE_NAMES
from .signal_io import AudioClip, DatasetManifest, load_clip, resample, scan_dataset, write_clip
from .taxonomy import EmotionLabel, Quadrant, parse_label, quadrant_of

__version__ = "0.1.0"

__all__ = [
    "AggregationParams", "AudioClip", "ClipFeatureVector", "DatasetManifest", "EmotionLabel",
    "FEATURE_NAMES", "Quadrant", "aggregate_feature_names", "extract_clip", "load_clip",
    "parse_label", "quadrant_of", "resample", "scan_dataset", "write_clip",
]
