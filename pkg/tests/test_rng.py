import numpy as np
import pytest

from convexlab.rng import stream_key, substream


def test_same_labels_same_bits():
    a = substream(42, "frame", 3).standard_normal(16)
    b = substream(42, "frame", 3).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_different_labels_differ():
    a = substream(42, "frame", 3).standard_normal(16)
    b = substream(42, "frame", 4).standard_normal(16)
    c = substream(43, "frame", 3).standard_normal(16)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_label_order_matters():
    assert not np.array_equal(stream_key(1, "a", "b"), stream_key(1, "b", "a"))


def test_label_boundaries_do_not_collide():
    assert not np.array_equal(stream_key(1, "ab", "c"), stream_key(1, "a", "bc"))


def test_negative_and_large_seeds_accepted():
    substream(-1, "x").standard_normal(2)
    substream(2**64 - 1, "x").standard_normal(2)


def test_bad_label_type_rejected():
    with pytest.raises(TypeError):
        stream_key(1, 3.5)
