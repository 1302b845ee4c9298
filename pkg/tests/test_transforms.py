import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from hyperselect.errors import InvalidInputError
from hyperselect.transforms import (
    TransformSpec,
    apply_exponential,
    apply_linear,
    apply_s_shaped,
    apply_spec,
    fit_bounds,
)

unit = st.floats(0, 1)
S_TOP = 1 - 1 / (1 + math.exp(6))


def uncentred_logistic(x, M, W):
    """Uncentred form of the same logistic, singular at M = 0."""
    return 1 - 1 / (1 + math.exp((6 * M / W) * (x / M - 1)))


class TestFitBounds:
    @pytest.mark.parametrize(
        "column, expected",
        [([0.2, 0.6], (0.4, 0.2)), ([0.3, 0.3], (0.3, 0.0)), ([0.0, 1.0], (0.5, 0.5))],
    )
    def test_examples(self, column, expected):
        (m, w), = fit_bounds([[v] for v in column])
        assert m == pytest.approx(expected[0], abs=1e-15)
        assert w == pytest.approx(expected[1], abs=1e-15)

    def test_several_columns(self):
        assert fit_bounds([[0, 10], [1, 30]]) == [(0.5, 0.5), (20.0, 10.0)]

    def test_empty_matrix(self):
        with pytest.raises(InvalidInputError):
            fit_bounds([])

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            fit_bounds([[0.1], [math.inf]])


class TestLinear:
    def test_midpoint(self):
        assert apply_linear(0.4, 0.4, 0.2) == 0.5

    def test_endpoints(self):
        assert apply_linear(0.6, 0.4, 0.2) == pytest.approx(1.0, abs=1e-12)
        assert apply_linear(0.2, 0.4, 0.2) == pytest.approx(0.0, abs=1e-12)

    def test_clamped_above(self):
        # (0.7 - 0.4 + 0.2) / 0.4 = 1.25 before clamping
        assert apply_linear(0.7, 0.4, 0.2) == 1.0

    def test_zero_width_is_inert(self):
        assert apply_linear(0.9, 0.3, 0.0) == 0.5

    def test_negative_width(self):
        with pytest.raises(InvalidInputError):
            apply_linear(0.1, 0.2, -1)

    @given(st.floats(-5, 5), st.floats(-2, 2), st.floats(0, 3))
    def test_range(self, x, M, W):
        assert 0.0 <= apply_linear(x, M, W) <= 1.0

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2), st.floats(1e-6, 3))
    def test_monotone(self, x1, x2, M, W):
        lo, hi = sorted((x1, x2))
        assert apply_linear(lo, M, W) <= apply_linear(hi, M, W)


class TestSShaped:
    def test_center(self):
        assert apply_s_shaped(0.4, 0.4, 0.2) == 0.5

    def test_upper_end(self):
        assert apply_s_shaped(0.6, 0.4, 0.2) == pytest.approx(0.997527, abs=1e-6)
        assert apply_s_shaped(0.6, 0.4, 0.2) == pytest.approx(S_TOP, abs=1e-12)

    def test_lower_end(self):
        assert apply_s_shaped(0.2, 0.4, 0.2) == pytest.approx(0.002473, abs=1e-6)

    def test_defined_at_zero_midpoint(self):
        assert apply_s_shaped(0.0, 0.0, 0.5) == 0.5

    def test_extreme_inputs_do_not_overflow(self):
        assert apply_s_shaped(1e6, 0.0, 1e-3) == 1.0
        assert apply_s_shaped(-1e6, 0.0, 1e-3) == 0.0

    @given(st.floats(-3, 3), st.floats(-2, 2), st.floats(1e-3, 3))
    def test_open_range(self, x, M, W):
        assume(abs(x - M) / W < 5)  # strict bounds hold until the logistic saturates in floating point
        assert 0.0 < apply_s_shaped(x, M, W) < 1.0

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2), st.floats(1e-3, 3))
    def test_monotone(self, x1, x2, M, W):
        lo, hi = sorted((x1, x2))
        assert apply_s_shaped(lo, M, W) <= apply_s_shaped(hi, M, W)

    def test_matches_uncentred_form_away_from_zero_midpoint(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            M = rng.uniform(0.05, 1.0) * rng.choice([-1, 1])
            W = rng.uniform(0.01, 1.0)
            x = M + rng.uniform(-2, 2) * W
            assert apply_s_shaped(x, M, W) == pytest.approx(uncentred_logistic(x, M, W), abs=1e-12)


class TestExponential:
    def test_one_maps_to_one(self):
        assert apply_exponential(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_zero(self):
        assert apply_exponential(0.0) == pytest.approx(math.exp(-5), abs=1e-12)
        assert apply_exponential(0.0) == pytest.approx(0.0067379, abs=1e-7)

    def test_half(self):
        # direct evaluation: 1 - 2 (e^-2.5 - e^-5) / (1 + e^-2.5)
        expected = 1 - 2 * (math.exp(-2.5) - math.exp(-5)) / (1 + math.exp(-2.5))
        assert apply_exponential(0.5) == pytest.approx(expected, abs=1e-15)
        assert apply_exponential(0.5) == pytest.approx(0.860738, abs=1e-6)

    @given(unit, unit)
    def test_strictly_increasing_on_unit_interval(self, a, b):
        assume(abs(a - b) > 1e-9)  # closer inputs can round to the same double
        lo, hi = sorted((a, b))
        assert apply_exponential(lo) < apply_exponential(hi)

    @given(unit)
    def test_range(self, x):
        assert math.exp(-5) - 1e-15 <= apply_exponential(x) <= 1 + 1e-15


class TestSpec:
    def test_identity_passthrough(self):
        v = [0.1, 0.7, 3.0]
        assert TransformSpec("identity").apply(v) is v
        assert apply_spec(TransformSpec("identity"), v) == v

    def test_full_range_linear_is_identity(self):
        spec = TransformSpec.fit("linear", [[0.0], [1.0]])
        assert apply_spec(spec, [0.25]) == [0.25]

    def test_s_shaped_centre(self):
        spec = TransformSpec.fit("s_shaped", [[0.2], [0.6]])
        assert apply_spec(spec, [0.4]) == [pytest.approx(0.5, abs=1e-12)]

    def test_length_mismatch(self):
        spec = TransformSpec.fit("linear", [[0.0, 1.0], [1.0, 2.0]])
        with pytest.raises(InvalidInputError):
            spec.apply([0.5])

    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            TransformSpec("cubic")

    def test_fitted_kind_needs_params(self):
        with pytest.raises(InvalidInputError):
            TransformSpec("linear")

    def test_json_round_trip(self):
        spec = TransformSpec.fit("s_shaped", [[0.1, 2.0], [0.3, 5.0]])
        assert TransformSpec.from_dict(spec.to_dict()) == spec
        doc = spec.to_dict()
        assert doc["kind"] == "s_shaped" and doc["K"] == 5.0
        assert np.allclose(doc["params"], [[0.2, 0.1], [3.5, 1.5]], atol=1e-15)

    @pytest.mark.parametrize("kind", ["linear", "s_shaped", "exponential"])
    def test_vectorised_matches_scalar(self, kind, rng):
        train = rng.random((30, 4)) * [1, 2, 0.1, 5]
        spec = TransformSpec.fit(kind, train)
        scalar = {"linear": apply_linear, "s_shaped": apply_s_shaped}
        for _ in range(50):
            x = rng.random(4) * 3 - 1
            got = apply_spec(spec, x)
            if kind == "exponential":
                want = [apply_exponential(v) for v in x]
            else:
                want = [scalar[kind](v, m, w) for v, (m, w) in zip(x, spec.params)]
            assert got == pytest.approx(want, abs=1e-12)

    def test_constant_feature_inert(self):
        spec = TransformSpec.fit("s_shaped", [[0.3, 0.1], [0.3, 0.9]])
        assert apply_spec(spec, [5.0, 0.5])[0] == 0.5

    @given(st.lists(st.tuples(unit, unit), min_size=2, max_size=20))
    def test_training_extremes_map_to_range_ends(self, rows):
        data = np.array(rows)
        assume(all(data[:, j].max() - data[:, j].min() > 1e-9 for j in range(2)))
        lin = TransformSpec.fit("linear", data)
        s = TransformSpec.fit("s_shaped", data)
        lo, hi = data.min(axis=0), data.max(axis=0)
        assert np.allclose(lin.apply(lo), 0.0, atol=1e-12) and np.allclose(lin.apply(hi), 1.0, atol=1e-12)
        assert np.allclose(s.apply(lo), 1 - S_TOP, atol=1e-9) and np.allclose(s.apply(hi), S_TOP, atol=1e-9)
