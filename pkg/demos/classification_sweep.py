# coding: utf-8

# # Comparing the six model families on synthetic clips
#
# Four kinds of clip (tremolo low tone, high tone, noise burst, rising chirp)
# are each tagged with one emotion from a different quadrant. Every family is
# swept over its default grid, picked on validation macro-F1 and scored once
# on the test split.

# In[1]:

import numpy as np

from prosody_emotion.aggregation import extract_clip
from prosody_emotion.classifiers import FAMILIES, LabeledSet
from prosody_emotion.evaluation import SplitSpec, stratified_split, sweep
from prosody_emotion.synth import KIND_EMOTIONS, four_class_clips


# In[2]:

clips, labels = four_class_clips(per_class=40, seed=0)
X = np.vstack([extract_clip(c).values for c in clips])
data = LabeledSet(X, np.asarray(labels), 4)
print(X.shape, [e.name for e in KIND_EMOTIONS])


# A 70/15/15 split, stratified by class.

# In[3]:

train_idx, val_idx, test_idx = stratified_split(data.labels, SplitSpec(seed=0))
train, val, test = (data.subset(rows=i) for i in (train_idx, val_idx, test_idx))
print(len(train), len(val), len(test))


# In[4]:

for family in FAMILIES:
    result = sweep(family, train, val, test, seed=0)
    print("%-18s %s=%-5s test accuracy %.1f  macro-F1 %.1f" % (
        FAMILIES[family].label, result.param, result.best_value,
        result.test.accuracy, result.test.macro_f1))


# The confusion matrix of the last model, rows are true classes.

# In[5]:

print(result.test.confusion)
