import numpy as np
import pytest

from artikit.corpus import AudioStream, PhoneInstance, UltrasoundStream, Utterance
from artikit.errors import UnsampleableError
from artikit.features import (
    BalancePolicy,
    balance_training_set,
    build_sample,
    extract_mfcc,
)
from artikit.features.samples import audio_step, ultrasound_step


def make_utterance(duration=2.0, fps=120.0, first_frame_time=0.0, seed=0):
    rng = np.random.default_rng(seed)
    samples = rng.integers(-4000, 4000, size=int(duration * 16000)).astype(np.int16)
    n_frames = int(duration * fps) + 1
    frames = rng.integers(0, 256, size=(n_frames, 20, 30)).astype(np.uint8)
    return Utterance(
        id="u0", speaker_id="s0", session_label="td",
        audio=AudioStream(samples),
        ultrasound=UltrasoundStream(frames=frames, fps=fps, first_frame_time=first_frame_time))


def make_instance(start=0.9, end=1.1, cls="velar"):
    return PhoneInstance(utterance_id="u0", speaker_id="s0", phone_label="k", cls=cls,
                         start=start, end=end, word="w", word_position="initial", index=0)


def test_shapes_fixed_across_fps():
    rng = np.random.default_rng(4)
    for fps in [60, 80, 100, 120, 121.3, 143.7, 200]:
        utt = make_utterance(fps=float(fps))
        mfcc = extract_mfcc(utt.audio)
        s = build_sample(make_instance(), utt, mfcc)
        assert s.audio_stack.shape == (11, 60)
        assert s.ultrasound_stack.shape == (9, 63, 103)
        assert s.ultrasound_stack.min() >= 0.0 and s.ultrasound_stack.max() <= 1.0
    for _ in range(20):
        fps = float(rng.uniform(60, 200))
        utt = make_utterance(fps=fps, duration=1.0)
        mfcc = extract_mfcc(utt.audio)
        s = build_sample(make_instance(start=0.4, end=0.6), utt, mfcc)
        assert s.audio_stack.shape == (11, 60)
        assert s.ultrasound_stack.shape == (9, 63, 103)


def test_context_steps_match_frame_rates():
    # 100 ms of context at ~120 fps is 12 frames (step 3); at ~80 fps, 8 (step 2)
    assert ultrasound_step(120.0) == 3
    assert ultrasound_step(80.0) == 2
    assert ultrasound_step(121.3) == 3
    assert audio_step() == 2


def test_context_indices_use_step():
    utt = make_utterance(fps=120.0)
    mfcc = extract_mfcc(utt.audio)
    s = build_sample(make_instance(start=0.9, end=1.1), utt, mfcc)
    anchor = round(1.0 * 120.0)
    expected = [utt.ultrasound.frames[np.clip(anchor + 3 * o, 0, utt.ultrasound.num_frames - 1)]
                for o in range(-4, 5)]
    from artikit.features import resample_ultrasound_frame
    for ch, frame in enumerate(expected):
        np.testing.assert_allclose(s.ultrasound_stack[ch],
                                   resample_ultrasound_frame(frame), atol=1e-6)


def test_clamping_at_stream_start():
    utt = make_utterance(duration=1.0, fps=120.0)
    mfcc = extract_mfcc(utt.audio)
    s = build_sample(make_instance(start=0.0, end=0.02), utt, mfcc)
    assert s.ultrasound_stack.shape == (9, 63, 103)
    # left context frames all clamp to frame 0
    np.testing.assert_allclose(s.ultrasound_stack[0], s.ultrasound_stack[1])
    np.testing.assert_allclose(s.audio_stack[0], s.audio_stack[1])


def test_perturbation_bounds():
    utt = make_utterance()
    mfcc = extract_mfcc(utt.audio)
    with pytest.raises(ValueError):
        build_sample(make_instance(), utt, mfcc, perturbation_ms=41.0)
    s = build_sample(make_instance(), utt, mfcc, perturbation_ms=-40.0)
    assert s.perturbation_ms == -40.0
    assert s.anchor_time == pytest.approx(1.0 - 0.040)


def test_anchor_outside_both_streams_raises():
    utt = make_utterance(duration=1.0)
    mfcc = extract_mfcc(utt.audio)
    with pytest.raises(UnsampleableError):
        build_sample(make_instance(start=3.0, end=3.2), utt, mfcc)


def test_balance_subsamples_large_class():
    utt = make_utterance()
    mfcc = extract_mfcc(utt.audio)
    base = build_sample(make_instance(), utt, mfcc)
    pool = [base] * 1500
    out = balance_training_set(pool, BalancePolicy(per_class_cap=1000), seed=0,
                               rebuild=lambda s, p: s)
    assert len(out) == 1000


def test_balance_upsamples_with_perturbations():
    utt = make_utterance()
    mfcc = extract_mfcc(utt.audio)
    originals = [build_sample(make_instance(start=0.5 + 0.001 * i, end=0.7 + 0.001 * i), utt, mfcc)
                 for i in range(40)]

    def rebuild(sample, pert):
        return build_sample(make_instance(start=sample.anchor_time - 0.1,
                                          end=sample.anchor_time + 0.1), utt, mfcc, pert)

    out = balance_training_set(originals, BalancePolicy(per_class_cap=100), seed=1, rebuild=rebuild)
    assert len(out) == 100
    perturbed = [s for s in out if s.perturbation_ms != 0.0]
    assert len(perturbed) == 60
    assert all(0 < abs(s.perturbation_ms) <= 40.0 for s in perturbed)
    # each instance used at most ceil(100/40) = 3 times
    assert max(np.bincount([int(round((s.anchor_time - s.perturbation_ms / 1000) * 1e4))
                            for s in out])) <= 3


def test_balance_deterministic():
    utt = make_utterance()
    mfcc = extract_mfcc(utt.audio)
    originals = [build_sample(make_instance(start=0.5, end=0.7), utt, mfcc) for _ in range(10)]

    def rebuild(sample, pert):
        return build_sample(make_instance(start=0.5, end=0.7), utt, mfcc, pert)

    a = balance_training_set(originals, BalancePolicy(per_class_cap=30), seed=9, rebuild=rebuild)
    b = balance_training_set(originals, BalancePolicy(per_class_cap=30), seed=9, rebuild=rebuild)
    assert [s.perturbation_ms for s in a] == [s.perturbation_ms for s in b]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.audio_stack, y.audio_stack)
