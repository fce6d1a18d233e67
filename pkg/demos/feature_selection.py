# coding: utf-8

# # Greedy forward feature selection
#
# Starting from an empty set, each round trains one probe network per
# remaining feature and keeps the feature that adds the most validation
# macro-F1. With n features this trains n(n+1)/2 networks.

# In[1]:

import numpy as np

from prosody_emotion.aggregation import aggregate_feature_names, extract_clip
from prosody_emotion.classifiers import LabeledSet
from prosody_emotion.selection import ProbeConfig, additive_selection, models_for, selection_rows
from prosody_emotion.synth import four_class_clips


# In[2]:

clips, labels = four_class_clips(per_class=30, seed=1)
X = np.vstack([extract_clip(c).values for c in clips])
y = np.asarray(labels)
order = np.random.default_rng(0).permutation(len(y))
train = LabeledSet(X[order[:80]], y[order[:80]], 4)
val = LabeledSet(X[order[80:]], y[order[80:]], 4)


# The full 136-feature run needs 9316 networks. Here only the first five rounds
# run, with a one-epoch probe.

# In[3]:

print("full run:", models_for(136), "models")
trace = additive_selection(train, val, ProbeConfig(epochs=1), seed=0, max_features=5)
print("trained", trace.models_trained)


# In[4]:

for rank, index, name, f1 in selection_rows(trace, aggregate_feature_names()):
    print(rank, index, name, round(f1, 1))
