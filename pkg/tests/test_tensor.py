import math

import pytest
from hypothesis import given, strategies as st

from diffattack import InputTensor, l1_distance, l2_distance, set_pixel
from diffattack.tensor import validate_shape


def tensors(min_size=1, max_size=12):
    return st.lists(
        st.floats(min_value=0.0, max_value=255.0, allow_nan=False),
        min_size=min_size, max_size=max_size,
    ).map(lambda vals: InputTensor((len(vals),), vals))


class TestConstruction:
    def test_values_match_shape(self):
        x = InputTensor((2, 2), [1, 2, 3, 4])
        assert x.shape == (2, 2)
        assert x.element_count == 4

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError, match="does not match shape"):
            InputTensor((2, 2), [1, 2, 3])

    def test_out_of_range_rejected_not_clamped(self):
        with pytest.raises(ValueError, match=r"\[0, 255\]"):
            InputTensor((2,), [0.0, 255.1])
        with pytest.raises(ValueError, match=r"\[0, 255\]"):
            InputTensor((2,), [-0.5, 10.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            InputTensor((1,), [float("nan")])

    def test_bad_shapes_rejected(self):
        for bad in [(), (0,), (2, -1), (2.5,)]:
            with pytest.raises(ValueError):
                validate_shape(bad)

    def test_backing_array_read_only(self):
        x = InputTensor((3,), [1, 2, 3])
        with pytest.raises(ValueError):
            x.values[0] = 9

    @given(st.floats(min_value=255.0, max_value=1e6, exclude_min=True,
                     allow_infinity=False))
    def test_any_over_range_value_rejected(self, value):
        with pytest.raises(ValueError):
            InputTensor((1,), [value])


class TestL2:
    def test_identity(self):
        x = InputTensor((2, 2), [5, 9, 0, 200])
        assert l2_distance(x, x) == 0.0

    def test_single_term(self):
        a = InputTensor.zeros((2, 2))
        b = set_pixel(a, 1, 3.0)
        assert l2_distance(a, b) == 3.0

    def test_direct_arithmetic(self):
        # sqrt(1 + 4 + 4) = 3
        a = InputTensor.zeros((4,))
        b = InputTensor((4,), [1, 2, 2, 0])
        assert l2_distance(a, b) == pytest.approx(3.0, abs=1e-12)

    def test_shape_mismatch_names_both_shapes(self):
        a = InputTensor.zeros((2, 2))
        b = InputTensor.zeros((4,))
        with pytest.raises(ValueError, match=r"\(2, 2\).*\(4,\)"):
            l2_distance(a, b)

    @given(tensors(max_size=8), tensors(max_size=8), tensors(max_size=8))
    def test_metric_axioms(self, a, b, c):
        size = min(a.element_count, b.element_count, c.element_count)
        a, b, c = (InputTensor((size,), t.values[:size]) for t in (a, b, c))
        dab = l2_distance(a, b)
        assert dab >= 0.0
        assert dab == l2_distance(b, a)
        assert (dab == 0.0) == (a == b)
        assert dab <= l2_distance(a, c) + l2_distance(c, b) + 1e-9


class TestL1:
    def test_identity(self):
        x = InputTensor((3,), [1, 2, 3])
        assert l1_distance(x, x) == 0.0

    def test_sum_of_abs(self):
        assert l1_distance(InputTensor.zeros((3,)),
                           InputTensor((3,), [1, 0, 2])) == 3.0

    def test_direct_arithmetic(self):
        a = InputTensor((2,), [0.1, 0.9])
        b = InputTensor((2,), [0.3, 0.7])
        assert l1_distance(a, b) == pytest.approx(0.4, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            l1_distance(InputTensor.zeros((2,)), InputTensor.zeros((3,)))


class TestSetPixel:
    def test_basic(self):
        out = set_pixel(InputTensor.zeros((4,)), 2, 255.0)
        assert out == InputTensor((4,), [0, 0, 255, 0])

    def test_noop_when_same_value(self):
        x = InputTensor((3,), [9, 8, 7])
        assert set_pixel(x, 1, x[1]) == x

    def test_source_unmodified(self):
        x = InputTensor.zeros((4,))
        set_pixel(x, 0, 11.0)
        assert x == InputTensor.zeros((4,))

    def test_single_pixel_distance_identity(self):
        x = InputTensor((4,), [10, 20, 30, 40])
        for i, v in [(0, 255.0), (2, 0.0), (3, 40.0)]:
            assert l2_distance(x, set_pixel(x, i, v)) == pytest.approx(
                abs(x[i] - v), abs=1e-12)

    def test_out_of_range_index(self):
        x = InputTensor.zeros((4,))
        with pytest.raises(IndexError):
            set_pixel(x, 4, 1.0)
        with pytest.raises(IndexError):
            set_pixel(x, -1, 1.0)

    def test_out_of_range_value(self):
        x = InputTensor.zeros((4,))
        with pytest.raises(ValueError):
            set_pixel(x, 0, 255.5)
        with pytest.raises(ValueError):
            set_pixel(x, 0, -1.0)

    @given(tensors(min_size=2),
           st.data())
    def test_set_then_restore_round_trips(self, x, data):
        i = data.draw(st.integers(min_value=0, max_value=x.element_count - 1))
        v = data.draw(st.floats(min_value=0.0, max_value=255.0,
                                allow_nan=False))
        original = x[i]
        assert set_pixel(set_pixel(x, i, v), i, original) == x


def test_reshaped_view_matches_shape():
    x = InputTensor((2, 3), range(6))
    view = x.reshaped()
    assert view.shape == (2, 3)
    assert view[1, 2] == 5.0
    assert math.prod(x.shape) == x.element_count
