import numpy as np
import pytest

import shallowrl


def test_feature_counts():
    assert shallowrl.count_distinct_features("basic") == 28672
    assert shallowrl.count_distinct_features("blob-prost") == 114702400
    with pytest.raises(ValueError):
        shallowrl.count_distinct_features("pixels")


def test_blobs_and_features():
    frame = np.zeros((210, 160), dtype=np.uint8)
    frame[10:12, 20:22] = 3
    blobs = shallowrl.detect_blobs(frame, 6)
    assert (3, 20, 21, 10, 11, 4) in blobs
    assert len(blobs) == 2

    x = shallowrl.FeatureExtractor("bpros", background=np.zeros((210, 160), dtype=np.uint8))
    ids = x.extract(frame)
    assert ids == sorted(ids)
    assert len(ids) == 2  # one primitive and its self pair


def test_background_mode():
    a = np.zeros((210, 160), dtype=np.uint8)
    b = a.copy()
    b[0, 0] = 7
    bg = shallowrl.compute_background([b, b, a])
    assert bg[0, 0] == 7
    assert bg[1, 1] == 0


def test_agent_round_trip():
    q = shallowrl.LinearQ(3, alpha=0.5, lambda_=0.9)
    q.update([1, 5], 2, 1.0, [], 0, True)
    values = q.q_values([1, 5])
    assert values[2] == pytest.approx(0.5)
    copy = shallowrl.LinearQ.load(q.save())
    assert copy.q_values([1, 5]) == values
    with pytest.raises(ValueError):
        shallowrl.LinearQ.load(b"nonsense")


def test_env_episode():
    env = shallowrl.Env("minicatch")
    frame = env.reset(0)
    assert frame.shape == (210, 160)
    total, done = 0.0, False
    while not done:
        frame, reward, done = env.step(0)
        total += reward
    assert -20 <= total <= 20


def test_trial_and_stats():
    r = shallowrl.run_trial(0, features="blob-prost", env="minicatch", episodes=2, eval_episodes=2)
    assert len(r["train"]) == 2
    assert len(r["eval"]) == 2
    with pytest.raises(TypeError):
        shallowrl.run_trial(0, colour="red")
    s = shallowrl.summarize_trials([float(i) for i in range(24)])
    assert s["middle"] == 12.0
    t, df, p = shallowrl.welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert t == pytest.approx(-1.0)
    assert df == pytest.approx(8.0)
    assert p == pytest.approx(0.3465935, abs=1e-6)


def test_benchmark():
    r = shallowrl.benchmark(1.0, features="blob-prost", env="minipong")
    assert r["decisions"] > 0
