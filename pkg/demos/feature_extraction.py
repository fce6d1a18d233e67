# coding: utf-8

# # From a sung phrase to a 136-value clip vector
#
# This walk-through follows one synthetic clip through the feature pipeline:
# framing, the 34 short-term features, deltas, mid-term statistics and the
# final clip average.

# In[1]:

import numpy as np

from prosody_emotion import dsp, features
from prosody_emotion.aggregation import (AggregationParams, aggregate_feature_names, append_deltas,
                                         clip_vector, midterm_stats)
from prosody_emotion.signal_io import AudioClip


# A 5 second vibrato tone stands in for a recording. The pipeline works at
# 16 kHz mono, so a real file would go through `load_clip` and `resample` first.

# In[2]:

sr = 16000
t = np.arange(5 * sr) / sr
pitch = 330 * (1 + 0.01 * np.sin(2 * np.pi * 5.5 * t))
x = 0.4 * np.sin(2 * np.pi * np.cumsum(pitch) / sr)
clip = AudioClip(x, sr, "vibrato")
print(clip.duration, "seconds")


# 50 ms frames with no overlap give 100 frames of 800 samples.

# In[3]:

frames = dsp.frame_signal(clip, 0.05, 0.05)
print(frames.frames.shape)


# Each frame becomes 34 numbers. The spectral centroid should sit near the
# 330 Hz fundamental.

# In[4]:

base = features.extract_frames(frames.frames, sr)
print(base.shape)
centroid = base[:, features.FEATURE_NAMES.index("spectral_centroid")]
print("median centroid %.1f Hz" % np.median(centroid))


# Deltas double the rows, one-second windows summarise them, and the clip
# vector is the average over windows.

# In[5]:

st = append_deltas(base.T)
mt = midterm_stats(st, AggregationParams())
vec = clip_vector(mt)
print(st.shape, mt.shape, vec.values.shape)


# The names follow the fixed layout: means first, then standard deviations,
# each with the base block before the delta block.

# In[6]:

names = aggregate_feature_names()
for i in (0, 7, 34, 68, 135):
    print(i + 1, names[i], round(float(vec.values[i]), 4))
