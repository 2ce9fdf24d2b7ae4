import numpy as np
import pytest

from schemaforge.streams import KEY_GENERATION, KEY_MONTE_CARLO, substream


def test_same_keys_same_stream():
    a = substream(7, KEY_GENERATION, 3).random(5)
    b = substream(7, KEY_GENERATION, 3).random(5)
    assert np.array_equal(a, b)


def test_different_keys_differ():
    a = substream(7, KEY_GENERATION, 3).random(5)
    assert not np.array_equal(a, substream(7, KEY_GENERATION, 4).random(5))
    assert not np.array_equal(a, substream(7, KEY_MONTE_CARLO, 3).random(5))
    assert not np.array_equal(a, substream(8, KEY_GENERATION, 3).random(5))


def test_full_64_bit_seed_accepted():
    substream(2**64 - 1, 0).random()


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        substream(-1)
