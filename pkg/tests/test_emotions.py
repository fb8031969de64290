import numpy as np
import pytest

from emopanel.emotions import EMOTIONS, NON_NEUTRAL, EmotionTuple, tuples_to_array


def test_storage_order_and_reference_category():
    assert EMOTIONS == ("neutral", "happy", "sad", "anger", "disgust", "surprise", "fear")
    # neutral is the omitted baseline in every regression
    assert "neutral" not in NON_NEUTRAL and set(NON_NEUTRAL) | {"neutral"} == set(EMOTIONS)


def test_from_sequence_round_trip():
    values = [0.064, 0.305, 0.431, 0.048, 0.03, 0.038, 0.084]
    t = EmotionTuple.from_sequence(values)
    assert t.as_list() == values
    assert t.sad == 0.431 and t.fear == 0.084
    np.testing.assert_array_equal(tuples_to_array([t, t]), np.array([values, values]))


def test_wrong_length_rejected():
    with pytest.raises(ValueError, match="7 components"):
        EmotionTuple.from_sequence([0.5, 0.5])


def test_pure_vertex_is_valid():
    t = EmotionTuple.pure("happy")
    assert t.happy == 1.0 and t.total() == 1.0
    t.validate()


@pytest.mark.parametrize("values, message", [
    ([1.2, -0.2, 0, 0, 0, 0, 0], "outside"),
    ([0.5, 0.4, 0, 0, 0, 0, 0], "sum to"),
    ([float("nan"), 1, 0, 0, 0, 0, 0], "outside"),
])
def test_validate_rejects_off_simplex(values, message):
    with pytest.raises(ValueError, match=message):
        EmotionTuple.from_sequence(values).validate()


def test_empty_array_shape():
    assert tuples_to_array([]).shape == (0, 7)
