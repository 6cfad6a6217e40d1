import numpy as np
import pytest

from circlecover import rng


def test_stream_continuity_across_chunking():
    whole = rng.uniforms(42, 1000, trial=3)
    a = rng.uniforms(42, 300, trial=3)
    assert np.array_equal(whole[:300], a)


def test_streams_are_independent_of_each_other():
    a = rng.uniforms(42, 100, trial=0, stream=rng.STREAM_MARKS)
    b = rng.uniforms(42, 100, trial=0, stream=rng.STREAM_CENTERS)
    c = rng.uniforms(42, 100, trial=0, stream=rng.STREAM_ALT)
    assert not np.array_equal(a, b)
    assert not np.array_equal(b, c)


def test_trials_and_seeds_decorrelate():
    a = rng.uniforms(1, 50, trial=0)
    b = rng.uniforms(1, 50, trial=1)
    c = rng.uniforms(2, 50, trial=0)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(a, rng.uniforms(1, 50, trial=0))


def test_stream_id_range():
    with pytest.raises(ValueError):
        rng.stream_key(0, 0, 256)
