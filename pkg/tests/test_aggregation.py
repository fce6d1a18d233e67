import numpy as np
import pytest

from conftest import sine, sine_clip
from prosody_emotion import aggregation as A
from prosody_emotion.signal_io import AudioClip
from prosody_emotion.taxonomy import EmotionLabel


def test_params_defaults_and_validation():
    p = A.AggregationParams()
    assert (p.st_win, p.st_step, p.mt_win, p.mt_step) == (0.05, 0.05, 1.0, 1.0)
    assert p.segment_frames == 20 and p.hop_frames == 20
    with pytest.raises(ValueError):
        A.AggregationParams(mt_win=1.01)
    with pytest.raises(ValueError):
        A.AggregationParams(st_win=0.1, mt_win=0.05, mt_step=0.05)
    with pytest.raises(ValueError):
        A.AggregationParams(st_step=0)


def test_deltas_examples():
    f = np.array([[1.0, 3.0, 6.0], [2.0, 2.0, 2.0]])
    st = A.append_deltas(f)
    assert st.shape == (4, 3)
    assert st[2].tolist() == [0.0, 2.0, 3.0]
    assert st[3].tolist() == [0.0, 0.0, 0.0]
    one = A.append_deltas(np.arange(34.0)[:, None])
    assert one.shape == (68, 1) and np.all(one[34:] == 0)


def test_delta_invariant(rng):
    f = rng.normal(size=(34, 50))
    st = A.append_deltas(f)
    assert np.all(st[34:, 0] == 0)
    assert np.allclose(st[34:, 1:], f[:, 1:] - f[:, :-1])


def test_midterm_segments(rng):
    p = A.AggregationParams()
    st = rng.normal(size=(68, 100))
    mt = A.midterm_stats(st, p)
    assert mt.shape == (136, 5)
    assert np.allclose(mt[:68, 2], st[:, 40:60].mean(axis=1))
    assert np.allclose(mt[68:, 2], st[:, 40:60].std(axis=1))
    single = A.midterm_stats(st[:, :20], p)
    assert single.shape == (136, 1)
    assert np.allclose(single[68:, 0], np.sqrt(((st[:, :20] - st[:, :20].mean(1, keepdims=True)) ** 2).mean(1)))


def test_midterm_tail_rule():
    p = A.AggregationParams()
    assert A.segment_bounds(29, p) == [(0, 20)]          # 9-frame tail < 10 dropped
    assert A.segment_bounds(30, p) == [(0, 20), (20, 30)]  # 10-frame tail kept
    assert A.segment_bounds(7, p) == [(0, 7)]             # shorter than half a window: one segment
    with pytest.raises(ValueError):
        A.segment_bounds(0, p)


def test_overlapping_midterm():
    p = A.AggregationParams(mt_win=1.0, mt_step=0.5)
    assert A.segment_bounds(40, p) == [(0, 20), (10, 30), (20, 40)]


def test_clip_vector_examples(rng):
    col = rng.normal(size=(136, 1))
    assert np.array_equal(A.clip_vector(col).values, col[:, 0])
    v = rng.normal(size=136)
    assert np.all(A.clip_vector(np.column_stack([v, -v])).values == 0)


def test_dimension_pipeline():
    clip = sine_clip(440, 5.0)
    st = A.short_term_matrix(clip)
    assert st.shape == (68, 100)
    mt = A.midterm_stats(st)
    assert mt.shape == (136, 5)
    v = A.extract_clip(clip)
    assert v.values.shape == (136,) and np.all(np.isfinite(v.values))
    assert np.all(v.values[68:] >= 0)


def test_sine_clip_values():
    v = A.extract_clip(sine_clip(440, 5.0)).values
    assert abs(v[0] - 0.055) <= 0.05 * 0.055
    assert v[68] < 0.01 * v[0]  # zcr nearly constant across frames


def test_silence_clip():
    v = A.extract_clip(AudioClip(np.zeros(16000), 16000)).values
    assert np.all(v[34:68] == 0) and np.all(v[68 + 34:] == 0)
    # population std of identical floats can round to a few ulps
    np.testing.assert_allclose(v[68:102], 0.0, atol=1e-12)


def test_short_clip_single_segment():
    v = A.extract_clip(sine_clip(300, 1.0))
    assert v.values.shape == (136,)
    with pytest.raises(ValueError):
        A.extract_clip(AudioClip(np.zeros(100), 16000))


@pytest.mark.parametrize("seconds", [1.0, 1.7, 2.5, 7.3, 20.0])
def test_dimension_for_any_length(seconds):
    assert A.extract_clip(sine_clip(250, seconds)).values.shape == (136,)


def test_time_shift_by_whole_periods():
    # 400 Hz at 16 kHz: one period is 40 samples
    x = sine(400, 3.0, amp=0.7, phase=0.3)
    a = A.extract_clip(AudioClip(x[:32000], 16000)).values
    b = A.extract_clip(AudioClip(x[40 * 7: 40 * 7 + 32000], 16000)).values
    assert np.max(np.abs(a - b)) < 1e-6


def test_doubling_keeps_means():
    x = sine(400, 2.0, amp=0.7, phase=0.3)
    a = A.extract_clip(AudioClip(x, 16000)).values
    b = A.extract_clip(AudioClip(np.concatenate([x, x]), 16000)).values
    assert np.max(np.abs(a[:68] - b[:68])) < 1e-6


def test_feature_names():
    names = A.aggregate_feature_names()
    assert len(names) == 136 and len(set(names)) == 136
    assert names[7] == "mean_spectral_rolloff"
    assert names[68 + 34 + 14] == "std_delta_mfcc_7"


def test_cache_roundtrip(tmp_path, rng):
    p = A.AggregationParams()
    vecs = [A.ClipFeatureVector(rng.normal(size=136), EmotionLabel.Joy, "s1", "s1/joy/a.wav"),
            A.ClipFeatureVector(rng.normal(size=136) * 1e-5, EmotionLabel.Relief, "s2", "s2/relief/b.wav")]
    path = tmp_path / "cache.csv"
    A.write_cache(path, vecs, p)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# prosody-feature-cache")
    assert lines[1].split(",")[:4] == ["clip_path", "singer_id", "emotion", "f1"]
    assert lines[1].split(",")[-1] == "f136"
    back = A.read_cache(path, p)
    for v, w in zip(vecs, back):
        assert np.allclose(v.values, w.values, rtol=1e-8)
        assert (v.label, v.singer_id, v.clip_path) == (w.label, w.singer_id, w.clip_path)
    assert A.cache_params(path) == p


def test_stale_cache_rejected(tmp_path, rng):
    path = tmp_path / "cache.csv"
    A.write_cache(path, [A.ClipFeatureVector(rng.normal(size=136), None, None, "x.wav")],
                  A.AggregationParams())
    with pytest.raises(A.StaleCacheError):
        A.read_cache(path, A.AggregationParams(mt_win=2.0, mt_step=2.0))
    text = path.read_text().replace('"feature_order": "v1"', '"feature_order": "v0"')
    path.write_text(text)
    with pytest.raises(A.StaleCacheError):
        A.read_cache(path)


def test_partial_window_rules():
    p = A.AggregationParams()
    # 20-frame windows, no overlap: 10 leftover frames form a segment, 9 do not
    assert A.segment_bounds(50, p)[-1] == (40, 50)
    assert A.segment_bounds(49, p)[-1] == (20, 40)
    # shorter than half a window still yields one segment
    assert A.segment_bounds(7, p) == [(0, 7)]
